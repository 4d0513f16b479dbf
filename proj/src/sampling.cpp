#include "conevol/sampling.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace conevol {

void validate(const MonteCarloConfig& config) {
  if (config.total_samples < 1) throw DomainError("Monte Carlo config: total_samples must be at least 1");
  if (config.chunk_size < 1) throw DomainError("Monte Carlo config: chunk_size must be at least 1");
  if (config.chunk_size > 0xFFFFFFFFull) throw DomainError("Monte Carlo config: chunk_size exceeds 2^32 - 1");
}

int resolve_workers(const MonteCarloConfig& config) {
  if (config.workers > 0) return config.workers;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

AmbientPoint gaussian_sample(std::uint64_t seed, std::uint64_t chunk, std::uint32_t index, std::size_t dim) {
  CounterRng rng(seed, chunk, index, kGaussianStream);
  AmbientPoint g(dim);
  for (double& x : g) x = rng.normal();
  return g;
}

AmbientPoint sphere_sample(std::span<const double> g) {
  const double r = norm(g);
  if (!(r > 1e-300)) throw DomainError("sphere_sample: vector norm underflows");
  AmbientPoint out(g.begin(), g.end());
  for (double& x : out) x /= r;
  return out;
}

AmbientPoint uniform_sphere_sample(std::uint64_t seed, std::uint64_t chunk, std::uint32_t index, std::size_t dim) {
  CounterRng rng(seed, chunk, index, kGaussianStream);
  AmbientPoint g(dim);
  for (;;) {
    for (double& x : g) x = rng.normal();
    if (norm(g) > 1e-300) return sphere_sample(g);
  }
}

// ---------------------------------------------------------------------------

void MomentAccumulator::add(double x) {
  const double n1 = static_cast<double>(n);
  ++n;
  const double nn = static_cast<double>(n);
  const double delta = x - mean;
  const double delta_n = delta / nn;
  const double delta_n2 = delta_n * delta_n;
  const double term1 = delta * delta_n * n1;
  mean += delta_n;
  m4 += term1 * delta_n2 * (nn * nn - 3.0 * nn + 3.0) + 6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
  m3 += term1 * delta_n * (nn - 2.0) - 3.0 * delta_n * m2;
  m2 += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n);
  const double nb = static_cast<double>(o.n);
  const double nt = na + nb;
  const double delta = o.mean - mean;
  const double d2 = delta * delta;
  const double d3 = d2 * delta;
  const double d4 = d2 * d2;

  const double new_m4 = m4 + o.m4 + d4 * na * nb * (na * na - na * nb + nb * nb) / (nt * nt * nt) +
                        6.0 * d2 * (na * na * o.m2 + nb * nb * m2) / (nt * nt) +
                        4.0 * delta * (na * o.m3 - nb * m3) / nt;
  const double new_m3 =
      m3 + o.m3 + d3 * na * nb * (na - nb) / (nt * nt) + 3.0 * delta * (na * o.m2 - nb * m2) / nt;
  const double new_m2 = m2 + o.m2 + d2 * na * nb / nt;

  mean += delta * nb / nt;
  m2 = new_m2;
  m3 = new_m3;
  m4 = new_m4;
  n += o.n;
}

void SampleSummary::merge(const SampleSummary& o) {
  count += o.count;
  s.merge(o.s);
  t.merge(o.t);
  if (face_histogram.size() < o.face_histogram.size()) face_histogram.resize(o.face_histogram.size(), 0);
  for (std::size_t k = 0; k < o.face_histogram.size(); ++k) face_histogram[k] += o.face_histogram[k];
  reservoir_s.insert(reservoir_s.end(), o.reservoir_s.begin(), o.reservoir_s.end());
  reservoir_t.insert(reservoir_t.end(), o.reservoir_t.begin(), o.reservoir_t.end());
  max_pythagorean_defect = std::max(max_pythagorean_defect, o.max_pythagorean_defect);
}

SampleSummary run_summary(const Cone& cone, const MonteCarloConfig& config, const SummaryOptions& options,
                          Execution execution) {
  validate(config);
  const std::size_t d = cone.ambient_dim();
  const bool faces = options.face_histogram && cone.is_polyhedral();
  const std::uint64_t cap = std::max<std::uint64_t>(options.reservoir_cap, 1);
  const std::uint64_t stride = (config.total_samples + cap - 1) / cap;

  SampleSummary init;
  init.dim = d;
  if (faces) init.face_histogram.assign(d + 1, 0);

  auto per_sample = [&](SampleSummary& acc, const ProjectionOutcome& out, std::span<const double> g,
                        std::uint64_t index) {
    ++acc.count;
    acc.s.add(out.sq_norm_proj);
    acc.t.add(out.sq_norm_residual);
    const double g2 = squared_norm(g);
    acc.max_pythagorean_defect = std::max(
        acc.max_pythagorean_defect, std::abs(out.sq_norm_proj + out.sq_norm_residual - g2) / (1.0 + g2));
    if (faces) ++acc.face_histogram[face_dimension(cone, out)];
    if (options.reservoir_cap > 0 && index % stride == 0) {
      acc.reservoir_s.push_back(out.sq_norm_proj);
      acc.reservoir_t.push_back(out.sq_norm_residual);
    }
  };
  return reduce_projections(cone, config, init, per_sample, execution);
}

namespace {

struct FunctionalAcc {
  std::vector<MomentAccumulator> acc;
  void merge(const FunctionalAcc& o) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i].merge(o.acc[i]);
  }
};

}  // namespace

std::vector<MeanEstimate> estimate_functionals(const Cone& cone, const MonteCarloConfig& config,
                                               const std::vector<ProjectionFunctional>& functionals,
                                               Execution execution) {
  FunctionalAcc init;
  init.acc.resize(functionals.size());
  const auto result = reduce_projections(
      cone, config, init,
      [&](FunctionalAcc& a, const ProjectionOutcome& out, std::span<const double>, std::uint64_t) {
        for (std::size_t i = 0; i < functionals.size(); ++i)
          a.acc[i].add(functionals[i](out.sq_norm_proj, out.sq_norm_residual));
      },
      execution);
  std::vector<MeanEstimate> est;
  est.reserve(functionals.size());
  for (const auto& m : result.acc) est.push_back({m.mean, m.standard_error()});
  return est;
}

}  // namespace conevol
