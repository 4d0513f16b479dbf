#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "conevol/cone.hpp"
#include "conevol/error.hpp"
#include "conevol/rng.hpp"

namespace conevol {

struct MonteCarloConfig {
  std::uint64_t seed = 0;
  std::uint64_t total_samples = 1;
  std::uint64_t chunk_size = std::uint64_t{1} << 14;
  /// Worker threads; 0 uses the OpenMP default. Never affects results.
  int workers = 0;

  std::uint64_t chunk_count() const { return (total_samples + chunk_size - 1) / chunk_size; }
};

enum class Execution { Parallel, Serial };

/// Validates a config (total_samples >= 1, chunk_size >= 1).
void validate(const MonteCarloConfig& config);

/// Worker count actually used for a config: config.workers, else OpenMP's default.
int resolve_workers(const MonteCarloConfig& config);

/// The j-th standard Gaussian vector of chunk i.
AmbientPoint gaussian_sample(std::uint64_t seed, std::uint64_t chunk, std::uint32_t index, std::size_t dim);

/// Reproducible random-access view of the Gaussian sample stream.
class GaussianStream {
 public:
  GaussianStream(const MonteCarloConfig& config, std::size_t dim) : config_(config), dim_(dim) {
    if (dim == 0) throw DomainError("gaussian stream dimension must be at least 1");
  }

  AmbientPoint sample(std::uint64_t chunk, std::uint32_t index) const {
    return gaussian_sample(config_.seed, chunk, index, dim_);
  }
  AmbientPoint at(std::uint64_t global_index) const {
    return sample(global_index / config_.chunk_size, static_cast<std::uint32_t>(global_index % config_.chunk_size));
  }
  std::size_t dim() const { return dim_; }

 private:
  MonteCarloConfig config_;
  std::size_t dim_;
};

/// g / ||g||. Throws DomainError when ||g|| <= 1e-300.
AmbientPoint sphere_sample(std::span<const double> g);

/// Uniform point on the unit sphere for sample (chunk, index); redraws from
/// the same counter stream on the underflow event.
AmbientPoint uniform_sphere_sample(std::uint64_t seed, std::uint64_t chunk, std::uint32_t index, std::size_t dim);

/// Streaming count/mean/central moments up to order four; merges with the
/// exact pairwise-combination formulas.
struct MomentAccumulator {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;

  void add(double x);
  void merge(const MomentAccumulator& other);

  /// Unbiased sample variance.
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double central2() const { return n > 0 ? m2 / static_cast<double>(n) : 0.0; }
  double central3() const { return n > 0 ? m3 / static_cast<double>(n) : 0.0; }
  double central4() const { return n > 0 ? m4 / static_cast<double>(n) : 0.0; }
  double standard_error() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct SummaryOptions {
  std::uint64_t reservoir_cap = 100000;
  bool face_histogram = true;
};

/// Moment summaries of s = ||Pi_C(g)||^2 and t = ||Pi_{C polar}(g)||^2.
struct SampleSummary {
  std::size_t dim = 0;
  std::uint64_t count = 0;
  MomentAccumulator s;
  MomentAccumulator t;
  /// face_histogram[k] = number of samples with face dimension k; empty when
  /// the cone has no face information.
  std::vector<std::uint64_t> face_histogram;
  /// Systematic thinning of the stream, in sample order.
  std::vector<double> reservoir_s;
  std::vector<double> reservoir_t;
  /// max over samples of |s + t - ||g||^2| / (1 + ||g||^2).
  double max_pythagorean_defect = 0.0;

  void merge(const SampleSummary& other);
};

namespace detail {

template <class Acc, class ChunkFn>
Acc reduce_chunks(const MonteCarloConfig& config, Execution execution, const Acc& init, ChunkFn chunk_fn) {
  validate(config);
  const std::uint64_t chunks = config.chunk_count();
  std::vector<Acc> partial(chunks, init);
  std::vector<std::exception_ptr> errors(chunks);

  auto run_one = [&](std::uint64_t c) {
    try {
      const std::uint64_t first = c * config.chunk_size;
      const std::uint64_t count = std::min(config.chunk_size, config.total_samples - first);
      chunk_fn(partial[c], c, first, count);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  if (execution == Execution::Parallel) {
    const int workers = resolve_workers(config);
    const auto n = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::int64_t c = 0; c < n; ++c) run_one(static_cast<std::uint64_t>(c));
  } else {
    for (std::uint64_t c = 0; c < chunks; ++c) run_one(c);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Fixed pairwise tree keyed to chunk index.
  while (partial.size() > 1) {
    std::vector<Acc> next;
    next.reserve((partial.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < partial.size(); i += 2) {
      partial[i].merge(partial[i + 1]);
      next.push_back(std::move(partial[i]));
    }
    if (partial.size() % 2 == 1) next.push_back(std::move(partial.back()));
    partial = std::move(next);
  }
  return std::move(partial.front());
}

}  // namespace detail

/// Chunked map-reduce over projected Gaussian samples. `per_sample(acc,
/// outcome, g, global_index)` folds one sample; Acc must provide merge().
/// Results depend only on (seed, total_samples, chunk_size).
template <class Acc, class PerSample>
Acc reduce_projections(const Cone& cone, const MonteCarloConfig& config, const Acc& init, PerSample per_sample,
                       Execution execution = Execution::Parallel) {
  const std::size_t dim = cone.ambient_dim();
  return detail::reduce_chunks(config, execution, init,
                               [&](Acc& acc, std::uint64_t chunk, std::uint64_t first, std::uint64_t count) {
                                 for (std::uint64_t j = 0; j < count; ++j) {
                                   const auto g =
                                       gaussian_sample(config.seed, chunk, static_cast<std::uint32_t>(j), dim);
                                   ProjectionOutcome out;
                                   try {
                                     out = project(cone, g);
                                   } catch (const Error& e) {
                                     throw Error("sample " + std::to_string(first + j) + ": " + e.what());
                                   }
                                   per_sample(acc, out, std::span<const double>(g), first + j);
                                 }
                               });
}

SampleSummary run_summary(const Cone& cone, const MonteCarloConfig& config, const SummaryOptions& options = {},
                          Execution execution = Execution::Parallel);

/// Mean and standard error of a functional f(s, t) of the projection norms.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

using ProjectionFunctional = std::function<double(double s, double t)>;

/// Monte Carlo estimates of E f_i(||Pi_C g||^2, ||Pi_{C polar} g||^2) for each f_i.
std::vector<MeanEstimate> estimate_functionals(const Cone& cone, const MonteCarloConfig& config,
                                               const std::vector<ProjectionFunctional>& functionals,
                                               Execution execution = Execution::Parallel);

}  // namespace conevol
