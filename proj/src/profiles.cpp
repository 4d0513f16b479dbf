#include "conevol/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "conevol/error.hpp"
#include "conevol/special.hpp"

namespace conevol {

namespace cv = cone_variant;

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Exact: return "exact";
    case Provenance::MonteCarloFace: return "mc_face";
    case Provenance::MonteCarloBiorthogonal: return "mc_biorthogonal";
    case Provenance::MonteCarloMixture: return "mc_mixture";
    case Provenance::Convolution: return "convolution";
  }
  return "exact";
}

Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::Exact, Provenance::MonteCarloFace, Provenance::MonteCarloBiorthogonal,
                 Provenance::MonteCarloMixture, Provenance::Convolution})
    if (to_string(p) == s) return p;
  throw DomainError("unknown profile provenance '" + s + "'");
}

double IntrinsicVolumeProfile::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) m += static_cast<double>(k) * v[k];
  return m;
}

double IntrinsicVolumeProfile::variance() const {
  const double m = mean();
  double var = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) var += (static_cast<double>(k) - m) * (static_cast<double>(k) - m) * v[k];
  return var;
}

IntrinsicVolumeProfile IntrinsicVolumeProfile::reversed() const {
  IntrinsicVolumeProfile r = *this;
  std::reverse(r.v.begin(), r.v.end());
  if (r.stderr_v) std::reverse(r.stderr_v->begin(), r.stderr_v->end());
  if (r.raw) std::reverse(r.raw->begin(), r.raw->end());
  return r;
}

IntrinsicVolumeProfile normalized_estimate(std::vector<double> raw, std::optional<std::vector<double>> se,
                                           Provenance provenance) {
  IntrinsicVolumeProfile p;
  p.d = raw.size() - 1;
  p.v = raw;
  for (double& x : p.v) x = std::max(x, 0.0);
  const double total = std::accumulate(p.v.begin(), p.v.end(), 0.0);
  if (total > 0.0)
    for (double& x : p.v) x /= total;
  p.raw = std::move(raw);
  p.stderr_v = std::move(se);
  p.provenance = provenance;
  return p;
}

IntrinsicVolumeProfile convolve(const IntrinsicVolumeProfile& a, const IntrinsicVolumeProfile& b) {
  IntrinsicVolumeProfile c;
  c.d = a.d + b.d;
  c.v.assign(c.d + 1, 0.0);
  for (std::size_t i = 0; i <= a.d; ++i)
    for (std::size_t j = 0; j <= b.d; ++j) c.v[i + j] += a.v[i] * b.v[j];
  if (a.stderr_v && b.stderr_v) {
    // First-order propagation, treating the two estimates as independent.
    std::vector<double> var(c.d + 1, 0.0);
    for (std::size_t k = 0; k <= c.d; ++k) {
      for (std::size_t i = 0; i <= a.d; ++i) {
        if (k < i || k - i > b.d) continue;
        const std::size_t j = k - i;
        var[k] += b.v[j] * b.v[j] * (*a.stderr_v)[i] * (*a.stderr_v)[i] +
                  a.v[i] * a.v[i] * (*b.stderr_v)[j] * (*b.stderr_v)[j];
      }
      var[k] = std::sqrt(var[k]);
    }
    c.stderr_v = std::move(var);
  }
  c.provenance = (a.provenance == Provenance::Exact && b.provenance == Provenance::Exact) ? Provenance::Exact
                                                                                           : Provenance::Convolution;
  return c;
}

namespace {

IntrinsicVolumeProfile indicator(std::size_t d, std::size_t k) {
  IntrinsicVolumeProfile p;
  p.d = d;
  p.v.assign(d + 1, 0.0);
  p.v[k] = 1.0;
  return p;
}

std::vector<double> binomial_half(std::size_t d) {
  std::vector<double> v(d + 1, 0.0);
  if (d <= 1000) {
    // Pascal's rule keeps the integer coefficients exact while they fit in 53 bits.
    std::vector<double> row(d + 1, 0.0);
    row[0] = 1.0;
    for (std::size_t n = 1; n <= d; ++n)
      for (std::size_t k = n; k > 0; --k) row[k] += row[k - 1];
    for (std::size_t k = 0; k <= d; ++k) v[k] = std::ldexp(row[k], -static_cast<int>(d));
  } else {
    for (std::size_t k = 0; k <= d; ++k) v[k] = binomial_pmf(static_cast<int>(d), 0.5, static_cast<int>(k));
  }
  return v;
}

}  // namespace

IntrinsicVolumeProfile exact_profile(const Cone& cone) {
  return std::visit(
      [&](const auto& c) -> IntrinsicVolumeProfile {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, cv::Subspace>) {
          return indicator(c.d, c.k);
        } else if constexpr (std::is_same_v<T, cv::Trivial>) {
          return indicator(c.d, 0);
        } else if constexpr (std::is_same_v<T, cv::Orthant>) {
          IntrinsicVolumeProfile p;
          p.d = c.d;
          p.v = binomial_half(c.d);
          return p;
        } else if constexpr (std::is_same_v<T, cv::Product>) {
          return convolve(exact_profile(*c.left), exact_profile(*c.right));
        } else if constexpr (std::is_same_v<T, cv::Polar>) {
          return exact_profile(*c.inner).reversed();
        } else {
          throw UnsupportedVariant(
              "exact_profile: no exact formula for this cone; use the face, biorthogonal or mixture estimator");
        }
      },
      cone.variant());
}

std::vector<std::pair<std::size_t, double>> circular_odd_profile(std::size_t d, double alpha) {
  if (d % 2 != 0 || d < 4) throw DomainError("circular_odd_profile: dimension must be even and at least 4");
  if (!(alpha > 0.0 && alpha < std::numbers::pi / 2))
    throw DomainError("circular_odd_profile: angle must lie in (0, pi/2)");
  const int n = static_cast<int>(d / 2 - 1);
  const double q = std::sin(alpha) * std::sin(alpha);
  std::vector<std::pair<std::size_t, double>> out;
  for (int k = 0; k <= n; ++k) out.emplace_back(2 * k + 1, 0.5 * binomial_pmf(n, q, k));
  return out;
}

// ---------------------------------------------------------------------------
// Face counting

IntrinsicVolumeProfile profile_from_faces(const SampleSummary& summary) {
  if (summary.face_histogram.empty()) throw UnsupportedVariant("summary carries no face-dimension histogram");
  const double n = static_cast<double>(summary.count);
  std::vector<double> v(summary.face_histogram.size());
  std::vector<double> se(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = static_cast<double>(summary.face_histogram[k]) / n;
    se[k] = std::sqrt(v[k] * (1.0 - v[k]) / n);
  }
  IntrinsicVolumeProfile p;
  p.d = v.size() - 1;
  p.v = std::move(v);
  p.stderr_v = std::move(se);
  p.provenance = Provenance::MonteCarloFace;
  return p;
}

IntrinsicVolumeProfile estimate_profile_face(const Cone& cone, const MonteCarloConfig& config) {
  if (!cone.is_polyhedral()) throw UnsupportedVariant("estimate_profile_face: cone is not polyhedral");
  SummaryOptions opts;
  opts.reservoir_cap = 0;
  return profile_from_faces(run_summary(cone, config, opts));
}

// ---------------------------------------------------------------------------
// Biorthogonal system

namespace {

using quad = __float128;

// Triple-double splits, exact to well past quad precision.
const quad kSqrtPiQ = static_cast<quad>(1.772453850905516) + static_cast<quad>(-7.666586499825799e-17) +
                      static_cast<quad>(-1.3058334907945429e-33);
const quad kSqrt2Q = static_cast<quad>(1.4142135623730951) + static_cast<quad>(-9.667293313452913e-17) +
                     static_cast<quad>(4.1386753086994136e-33);

quad abs_q(quad x) { return x < 0 ? -x : x; }

// Gamma(m/2) for m = 1..count, exact recurrences from Gamma(1/2) and Gamma(1).
std::vector<quad> half_integer_gammas(std::size_t count) {
  std::vector<quad> g(count + 1, 0);
  if (count >= 1) g[1] = kSqrtPiQ;
  if (count >= 2) g[2] = 1;
  for (std::size_t m = 3; m <= count; ++m) g[m] = (static_cast<quad>(m) / 2 - 1) * g[m - 2];
  return g;
}

quad pow2_half(std::size_t m) {
  quad p = 1;
  for (std::size_t i = 0; i < m / 2; ++i) p *= 2;
  if (m % 2 == 1) p *= kSqrt2Q;
  return p;
}

void cholesky_solve(const std::vector<quad>& l, std::size_t n, std::vector<quad>& rhs) {
  for (std::size_t i = 0; i < n; ++i) {
    quad s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * rhs[k];
    rhs[i] = s / l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    quad s = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * rhs[k];
    rhs[i] = s / l[i * n + i];
  }
}

quad sqrt_q(quad x) {
  quad r = std::sqrt(static_cast<double>(x));
  for (int i = 0; i < 3; ++i) r = (r + x / r) / 2;
  return r;
}

}  // namespace

double chi_basis_function(std::size_t k, double s) {
  if (s <= 0.0) return 0.0;
  const double half_k = 0.5 * static_cast<double>(k);
  return std::exp(half_k * std::log(0.5 * s) - 0.5 * s - log_gamma(half_k));
}

BiorthogonalSystem BiorthogonalSystem::build(std::size_t d) {
  if (d < 1 || d > kMaxDim)
    throw GuardError("biorthogonal system: dimension " + std::to_string(d) +
                     " outside [1, 20]; the Gram matrix is too ill-conditioned, use the mixture estimator");
  const auto gam = half_integer_gammas(2 * d);
  std::vector<quad> g(d * d);
  for (std::size_t k = 1; k <= d; ++k)
    for (std::size_t l = 1; l <= d; ++l) g[(k - 1) * d + (l - 1)] = gam[k + l] / (pow2_half(k + l) * gam[k] * gam[l]);

  std::vector<quad> chol(d * d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    quad s = g[j * d + j];
    for (std::size_t k = 0; k < j; ++k) s -= chol[j * d + k] * chol[j * d + k];
    if (!(s > 0)) throw GuardError("biorthogonal system: Gram matrix lost positive definiteness");
    chol[j * d + j] = sqrt_q(s);
    for (std::size_t i = j + 1; i < d; ++i) {
      quad t = g[i * d + j];
      for (std::size_t k = 0; k < j; ++k) t -= chol[i * d + k] * chol[j * d + k];
      chol[i * d + j] = t / chol[j * d + j];
    }
  }

  // Columns of the inverse, each with one step of iterative refinement.
  std::vector<quad> inv(d * d);
  for (std::size_t col = 0; col < d; ++col) {
    std::vector<quad> x(d, 0);
    x[col] = 1;
    cholesky_solve(chol, d, x);
    std::vector<quad> r(d);
    for (std::size_t i = 0; i < d; ++i) {
      quad s = (i == col) ? 1 : 0;
      for (std::size_t k = 0; k < d; ++k) s -= g[i * d + k] * x[k];
      r[i] = s;
    }
    cholesky_solve(chol, d, r);
    for (std::size_t i = 0; i < d; ++i) inv[i * d + col] = x[i] + r[i];
  }

  BiorthogonalSystem sys;
  sys.d_ = d;
  sys.gram_.resize(d * d);
  sys.coef_.resize(d * d);
  sys.poly_.resize(d * d);
  quad g_norm = 0;
  quad inv_norm = 0;
  quad resid = 0;
  for (std::size_t j = 0; j < d; ++j) {
    quad gcol = 0;
    quad icol = 0;
    for (std::size_t i = 0; i < d; ++i) {
      gcol += abs_q(g[i * d + j]);
      icol += abs_q(inv[i * d + j]);
    }
    g_norm = std::max(g_norm, gcol);
    inv_norm = std::max(inv_norm, icol);
  }
  for (std::size_t i = 0; i < d; ++i) {
    quad row = 0;
    for (std::size_t j = 0; j < d; ++j) {
      quad s = (i == j) ? -1 : 0;
      for (std::size_t k = 0; k < d; ++k) s += g[i * d + k] * inv[k * d + j];
      row += abs_q(s);
    }
    resid = std::max(resid, row);
  }
  for (std::size_t i = 0; i < d * d; ++i) {
    sys.gram_[i] = static_cast<double>(g[i]);
    // c = G^{-1} is symmetric; row j holds the coefficients of f_j.
    sys.coef_[i] = static_cast<double>(inv[i]);
  }
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 1; k <= d; ++k)
      sys.poly_[j * d + (k - 1)] = inv[j * d + (k - 1)] / gam[k];
  sys.condition_ = static_cast<double>(g_norm * inv_norm);
  sys.residual_ = static_cast<double>(resid);
  return sys;
}

double BiorthogonalSystem::evaluate(std::size_t j, double s) const {
  if (j < 1 || j > d_) throw DomainError("biorthogonal function index out of range");
  if (s <= 0.0) return 0.0;
  const quad u = std::sqrt(static_cast<long double>(s) / 2.0L);
  const quad* p = poly_.data() + (j - 1) * d_;
  quad acc = 0;
  for (std::size_t k = d_; k >= 1; --k) acc = acc * u + p[k - 1];
  return static_cast<double>(acc * u) * std::exp(-0.5 * s);
}

void BiorthogonalSystem::evaluate_all(double s, std::span<double> out) const {
  if (s <= 0.0) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(d_), 0.0);
    return;
  }
  const quad u = std::sqrt(static_cast<long double>(s) / 2.0L);
  const double damp = std::exp(-0.5 * s);
  for (std::size_t j = 0; j < d_; ++j) {
    const quad* p = poly_.data() + j * d_;
    quad acc = 0;
    for (std::size_t k = d_; k >= 1; --k) acc = acc * u + p[k - 1];
    out[j] = static_cast<double>(acc * u) * damp;
  }
}

namespace {

// Gauss-Legendre rule on [a, b] in long double; the biorthogonality check
// integrates cancelling terms of size ~cond(G), so double nodes are too coarse.
void legendre_rule_ld(int n, long double a, long double b, std::vector<long double>& x, std::vector<long double>& w) {
  x.resize(n);
  w.resize(n);
  const long double pi = 3.141592653589793238462643383279502884L;
  for (int i = 0; i < n; ++i) {
    long double z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    long double dp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L;
      long double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0L);
      const long double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-19L) break;
    }
    x[i] = 0.5L * (b - a) * z + 0.5L * (b + a);
    w[i] = (b - a) / ((1.0L - z * z) * dp * dp);
  }
}

}  // namespace

double BiorthogonalSystem::quadrature_defect() const {
  // With s = 2u^2 the chi-square(k) law of s has density 2 u^{k-1} e^{-u^2} / Gamma(k/2)
  // in u; every integrand carries e^{-2u^2}, negligible beyond u = 9.
  std::vector<long double> nodes;
  std::vector<long double> weights;
  legendre_rule_ld(240, 0.0L, 9.0L, nodes, weights);
  std::vector<long double> lg(d_ + 1);
  for (std::size_t k = 1; k <= d_; ++k) lg[k] = std::lgamma(0.5L * static_cast<long double>(k));
  double worst = 0.0;
  for (std::size_t j = 1; j <= d_; ++j) {
    const quad* p = poly_.data() + (j - 1) * d_;
    std::vector<long double> fj(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const quad u = nodes[i];
      quad acc = 0;
      for (std::size_t m = d_; m >= 1; --m) acc = acc * u + p[m - 1];
      fj[i] = static_cast<long double>(acc * u) * std::exp(-nodes[i] * nodes[i]);
    }
    for (std::size_t k = 1; k <= d_; ++k) {
      long double sum = 0.0L;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const long double u = nodes[i];
        const long double dens =
            2.0L * std::exp((static_cast<long double>(k) - 1.0L) * std::log(u) - u * u - lg[k]);
        sum += weights[i] * fj[i] * dens;
      }
      worst = std::max(worst, static_cast<double>(std::abs(sum - (j == k ? 1.0L : 0.0L))));
    }
  }
  return worst;
}

namespace {

struct BiorthAcc {
  std::vector<MomentAccumulator> f;  // f_1..f_d at s, then f_d at t
  void merge(const BiorthAcc& o) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i].merge(o.f[i]);
  }
};

}  // namespace

IntrinsicVolumeProfile estimate_profile_biorthogonal(const Cone& cone, const MonteCarloConfig& config,
                                                     Execution execution) {
  const std::size_t d = cone.ambient_dim();
  const auto sys = BiorthogonalSystem::build(d);
  BiorthAcc init;
  init.f.resize(d + 1);
  const auto acc = reduce_projections(
      cone, config, init,
      [&](BiorthAcc& a, const ProjectionOutcome& out, std::span<const double>, std::uint64_t) {
        double buf[BiorthogonalSystem::kMaxDim];
        sys.evaluate_all(out.sq_norm_proj, std::span<double>(buf, d));
        for (std::size_t j = 0; j < d; ++j) a.f[j].add(buf[j]);
        // v_0(C) = v_d(C polar), estimated from the residual norms.
        a.f[d].add(sys.evaluate(d, out.sq_norm_residual));
      },
      execution);
  std::vector<double> raw(d + 1);
  std::vector<double> se(d + 1);
  raw[0] = acc.f[d].mean;
  se[0] = acc.f[d].standard_error();
  for (std::size_t j = 1; j <= d; ++j) {
    raw[j] = acc.f[j - 1].mean;
    se[j] = acc.f[j - 1].standard_error();
  }
  return normalized_estimate(std::move(raw), std::move(se), Provenance::MonteCarloBiorthogonal);
}

// ---------------------------------------------------------------------------
// Mixture inversion

namespace {

std::vector<double> quantile_grid(std::size_t d, std::vector<double> sample) {
  if (sample.empty()) throw GuardError("mixture estimator: empty sample reservoir");
  std::sort(sample.begin(), sample.end());
  const std::size_t m = 4 * (d + 1);
  std::vector<double> grid(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    auto idx = static_cast<std::size_t>(p * static_cast<double>(sample.size()));
    grid[i] = sample[std::min(idx, sample.size() - 1)];
  }
  return grid;
}

std::vector<double> solve_mixture(std::size_t d, const std::vector<double>& grid, const std::vector<double>& ecdf) {
  // Generators are the columns of the design A_{ik} = P{X_k <= lambda_i}.
  Matrix design_t(d + 1, grid.size());
  for (std::size_t k = 0; k <= d; ++k)
    for (std::size_t i = 0; i < grid.size(); ++i) design_t(k, i) = chi_square_cdf(static_cast<int>(k), grid[i]);
  return nnls_solve(design_t, ecdf).coefficients;
}

std::vector<double> normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total > 0.0)
    for (double& x : w) x /= total;
  return w;
}

struct CdfCounts {
  std::size_t batches = 0;
  std::vector<std::uint64_t> counts;  // [batch * m + i]
  std::vector<std::uint64_t> totals;  // per batch
  void merge(const CdfCounts& o) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    for (std::size_t b = 0; b < totals.size(); ++b) totals[b] += o.totals[b];
  }
};

}  // namespace

IntrinsicVolumeProfile fit_mixture(std::size_t d, std::vector<double> sample_s) {
  const auto grid = quantile_grid(d, sample_s);
  std::sort(sample_s.begin(), sample_s.end());
  std::vector<double> ecdf(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    ecdf[i] = static_cast<double>(std::upper_bound(sample_s.begin(), sample_s.end(), grid[i]) - sample_s.begin()) /
              static_cast<double>(sample_s.size());
  return normalized_estimate(solve_mixture(d, grid, ecdf), std::nullopt, Provenance::MonteCarloMixture);
}

IntrinsicVolumeProfile estimate_profile_mixture(const Cone& cone, const MonteCarloConfig& config,
                                                const MixtureOptions& options, Execution execution) {
  const std::size_t d = cone.ambient_dim();
  SummaryOptions sopts;
  sopts.reservoir_cap = options.reservoir_cap;
  sopts.face_histogram = false;
  const auto summary = run_summary(cone, config, sopts, execution);
  const auto grid = quantile_grid(d, summary.reservoir_s);
  const std::size_t m = grid.size();

  // Second pass: empirical CDF at the grid over the whole stream, split into
  // interleaved batches by sample index.
  const std::size_t batches = std::max<std::size_t>(options.batches, 1);
  CdfCounts init;
  init.batches = batches;
  init.counts.assign(batches * m, 0);
  init.totals.assign(batches, 0);
  const auto counts = reduce_projections(
      cone, config, init,
      [&](CdfCounts& c, const ProjectionOutcome& out, std::span<const double>, std::uint64_t index) {
        const std::size_t b = index % batches;
        ++c.totals[b];
        const auto first = std::lower_bound(grid.begin(), grid.end(), out.sq_norm_proj);
        for (auto it = first; it != grid.end(); ++it) ++c.counts[b * m + static_cast<std::size_t>(it - grid.begin())];
      },
      execution);

  std::vector<double> ecdf(m, 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < batches; ++b) total += static_cast<double>(counts.totals[b]);
  for (std::size_t i = 0; i < m; ++i) {
    double c = 0.0;
    for (std::size_t b = 0; b < batches; ++b) c += static_cast<double>(counts.counts[b * m + i]);
    ecdf[i] = c / total;
  }
  auto raw = solve_mixture(d, grid, ecdf);

  std::optional<std::vector<double>> se;
  if (options.batches >= 2 && config.total_samples >= 2 * options.batches) {
    // Delete-one-batch jackknife: each replicate refits on the other B - 1
    // batches, so it sees nearly the full sample and the same active set
    // instability as the full fit.
    std::vector<MomentAccumulator> spread(d + 1);
    for (std::size_t b = 0; b < batches; ++b) {
      std::vector<double> eb(m, 0.0);
      const double kept = total - static_cast<double>(counts.totals[b]);
      for (std::size_t i = 0; i < m; ++i) {
        double c = 0.0;
        for (std::size_t o = 0; o < batches; ++o)
          if (o != b) c += static_cast<double>(counts.counts[o * m + i]);
        eb[i] = c / kept;
      }
      const auto wb = normalized(solve_mixture(d, grid, eb));
      for (std::size_t k = 0; k <= d; ++k) spread[k].add(wb[k]);
    }
    const double nb = static_cast<double>(batches);
    std::vector<double> s(d + 1);
    for (std::size_t k = 0; k <= d; ++k) s[k] = std::sqrt((nb - 1.0) / nb * spread[k].m2);
    se = std::move(s);
  }
  return normalized_estimate(std::move(raw), std::move(se), Provenance::MonteCarloMixture);
}

// ---------------------------------------------------------------------------

Estimate statistical_dimension(const SampleSummary& summary) {
  if (summary.count < 2) throw GuardError("statistical_dimension: need at least two samples");
  return {summary.s.mean, summary.s.standard_error()};
}

namespace {

Estimate variance_side(const MomentAccumulator& m) {
  const double n = static_cast<double>(m.n);
  const double var = m.variance();
  const double mu2 = m.central2();
  // Delta method for Var[x] - 2 E[x]: Var(sample var) + 4 Var(mean) - 4 Cov.
  const double spread = m.central4() - mu2 * mu2 - 4.0 * m.central3() + 4.0 * mu2;
  return {var - 2.0 * m.mean, std::sqrt(std::max(spread, 0.0) / n)};
}

}  // namespace

VarianceEstimate intrinsic_variance(const SampleSummary& summary) {
  if (summary.count < 2) throw GuardError("intrinsic_variance: need at least two samples");
  VarianceEstimate out;
  out.primal = variance_side(summary.s);
  out.polar = variance_side(summary.t);
  const double a = out.primal.std_error;
  const double b = out.polar.std_error;
  if (a == 0.0 && b == 0.0) {
    out.combined = {0.5 * (out.primal.value + out.polar.value), 0.0};
  } else if (a == 0.0) {
    out.combined = out.primal;
  } else if (b == 0.0) {
    out.combined = out.polar;
  } else {
    const double wa = 1.0 / (a * a);
    const double wb = 1.0 / (b * b);
    // The two sides are strongly correlated (s + t = ||g||^2), so the SE uses
    // the perfectly-correlated bound rather than 1/sqrt(wa + wb).
    out.combined = {(wa * out.primal.value + wb * out.polar.value) / (wa + wb), (wa * a + wb * b) / (wa + wb)};
  }
  return out;
}

}  // namespace conevol
