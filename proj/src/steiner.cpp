#include "conevol/steiner.hpp"

#include <algorithm>
#include <cmath>

#include "conevol/error.hpp"
#include "conevol/rng.hpp"
#include "conevol/special.hpp"

namespace conevol {

namespace {

constexpr std::size_t kLaguerreNodes = 96;
constexpr std::uint64_t kFallbackSamples = 1000000;

// Nodes and weights for E h(X) with X ~ chi-square(k) after the exponential
// tilt: E g(X) = sum_i w_i g(x_i) m_i where m_i undoes the tilt.
struct AxisRule {
  std::vector<double> x;
  std::vector<double> w;  // includes the tilt correction
};

AxisRule axis_rule(std::size_t k, double xi) {
  AxisRule r;
  if (k == 0) {
    r.x = {0.0};
    r.w = {1.0};
    return r;
  }
  const double alpha = 0.5 * static_cast<double>(k) - 1.0;
  const auto rule = gauss_laguerre(kLaguerreNodes, alpha);
  // With Y ~ Gamma(k/2), X = 2Y; tilting by c = 1 - 2 xi gives
  // E g(X) = c^{-k/2} E[g(2Z/c) exp(-2 xi Z / c)] for Z ~ Gamma(k/2).
  const double c = 1.0 - 2.0 * xi;
  const double scale = std::pow(c, -0.5 * static_cast<double>(k));
  r.x.resize(rule.nodes.size());
  r.w.resize(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    r.x[i] = 2.0 * z / c;
    r.w[i] = rule.weights[i] * scale * std::exp(-2.0 * xi * z / c);
  }
  return r;
}

double effective_xi(const BivariateFunctional& f) { return f.tag == Integrability::Exponential ? f.xi : 0.0; }

struct MomentOnly {
  MomentAccumulator m;
  void merge(const MomentOnly& o) { m.merge(o.m); }
};

}  // namespace

void validate(const BivariateFunctional& f) {
  if (!f.f) throw DomainError("bivariate functional has no evaluation rule");
  if (f.tag == Integrability::Exponential && !(f.xi < 0.5))
    throw DomainError("exponential functional with xi >= 1/2: the chi-square moment diverges");
  if (f.tag == Integrability::Exponential && !std::isfinite(f.xi)) throw DomainError("exponential rate is not finite");
  static const double probe[] = {0.0, 0.25, 1.0, 2.0, 5.0, 20.0, 80.0, 200.0};
  double near = 0.0;
  double far = 0.0;
  for (double a : probe) {
    for (double b : probe) {
      const double v = f.f(a, b);
      if (!std::isfinite(v))
        throw DomainError("bivariate functional is not finite at (" + std::to_string(a) + ", " + std::to_string(b) +
                          ")");
      if (a <= 2.0 && b <= 2.0) near = std::max(near, std::abs(v));
      else far = std::max(far, std::abs(v));
    }
  }
  if (f.tag == Integrability::Bounded && far > 1e6 * (1.0 + near))
    throw DomainError("functional tagged bounded grows without bound on the probe grid");
}

Estimate subspace_moment(const BivariateFunctional& f, std::size_t k, std::size_t d, std::uint64_t seed) {
  if (k > d) throw DomainError("subspace_moment: k exceeds d");
  validate(f);
  if (f.smooth) {
    const double xi = effective_xi(f);
    const auto ra = axis_rule(k, xi);
    const auto rb = axis_rule(d - k, xi);
    double sum = 0.0;
    for (std::size_t i = 0; i < ra.x.size(); ++i) {
      double inner = 0.0;
      for (std::size_t j = 0; j < rb.x.size(); ++j) {
        const double v = f.f(ra.x[i], rb.x[j]);
        if (!std::isfinite(v)) throw DomainError("subspace_moment: functional is not finite at a quadrature node");
        inner += rb.w[j] * v;
      }
      sum += ra.w[i] * inner;
    }
    return {sum, 0.0};
  }

  MonteCarloConfig cfg;
  cfg.seed = seed;
  cfg.total_samples = kFallbackSamples;
  const auto acc = detail::reduce_chunks(
      cfg, Execution::Parallel, MomentOnly{},
      [&](MomentOnly& a, std::uint64_t chunk, std::uint64_t, std::uint64_t count) {
        for (std::uint64_t j = 0; j < count; ++j) {
          CounterRng rng(seed, (static_cast<std::uint64_t>(k) << 32) | chunk, static_cast<std::uint32_t>(j),
                         kMomentStream);
          const double x = rng.chi_square(static_cast<int>(k));
          const double y = rng.chi_square(static_cast<int>(d - k));
          a.m.add(f.f(x, y));
        }
      });
  return {acc.m.mean, acc.m.standard_error()};
}

Estimate master_phi(const BivariateFunctional& f, const IntrinsicVolumeProfile& profile, std::uint64_t seed) {
  double value = 0.0;
  double var = 0.0;
  for (std::size_t k = 0; k <= profile.d; ++k) {
    if (profile.v[k] == 0.0) continue;
    const auto m = subspace_moment(f, k, profile.d, seed);
    value += m.value * profile.v[k];
    var += profile.v[k] * profile.v[k] * m.std_error * m.std_error;
  }
  return {value, std::sqrt(var)};
}

double gaussian_steiner_cdf(const IntrinsicVolumeProfile& profile, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("gaussian_steiner_cdf: lambda must be nonnegative");
  double sum = 0.0;
  for (std::size_t k = 0; k <= profile.d; ++k)
    if (profile.v[k] != 0.0) sum += chi_square_cdf(static_cast<int>(profile.d - k), lambda) * profile.v[k];
  return sum;
}

double spherical_steiner_cdf(const IntrinsicVolumeProfile& profile, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("spherical_steiner_cdf: lambda must lie in [0, 1]");
  if (lambda == 1.0) return 1.0;
  // For the subspace L_k, dist^2(theta, L_k) = ||Pi_{L_k perp} theta||^2 ~ Beta((d-k)/2, k/2).
  double sum = 0.0;
  const double d = static_cast<double>(profile.d);
  for (std::size_t k = 0; k <= profile.d; ++k) {
    if (profile.v[k] == 0.0) continue;
    const double kk = static_cast<double>(k);
    sum += beta_cdf(0.5 * (d - kk), 0.5 * kk, lambda) * profile.v[k];
  }
  return sum;
}

// ---------------------------------------------------------------------------

ChiBarSquared::ChiBarSquared(IntrinsicVolumeProfile profile) : profile_(std::move(profile)) {
  cumulative_.resize(profile_.v.size());
  double run = 0.0;
  for (std::size_t k = 0; k < profile_.v.size(); ++k) {
    run += profile_.v[k];
    cumulative_[k] = run;
  }
}

double ChiBarSquared::cdf(double lambda) const {
  double sum = 0.0;
  for (std::size_t k = 0; k <= profile_.d; ++k)
    if (profile_.v[k] != 0.0) sum += chi_square_cdf(static_cast<int>(k), lambda) * profile_.v[k];
  return sum;
}

namespace {

struct SampleBlock {
  std::vector<double> x;
  void merge(const SampleBlock& o) { x.insert(x.end(), o.x.begin(), o.x.end()); }
};

}  // namespace

std::vector<double> ChiBarSquared::sample(const MonteCarloConfig& config, Execution execution) const {
  const double total = cumulative_.back();
  auto block = detail::reduce_chunks(
      config, execution, SampleBlock{},
      [&](SampleBlock& b, std::uint64_t chunk, std::uint64_t, std::uint64_t count) {
        b.x.reserve(count);
        for (std::uint64_t j = 0; j < count; ++j) {
          CounterRng rng(config.seed, chunk, static_cast<std::uint32_t>(j), kChiBarStream);
          const double u = rng.uniform() * total;
          auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
          const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), profile_.d);
          b.x.push_back(rng.chi_square(static_cast<int>(k)));
        }
      });
  return std::move(block.x);
}

double wills_functional(const IntrinsicVolumeProfile& profile, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("wills_functional: lambda must be positive");
  double sum = 0.0;
  for (std::size_t k = profile.d + 1; k-- > 0;) sum = sum * lambda + profile.v[k];
  return sum;
}

MeanEstimate wills_mc(const Cone& cone, double lambda, const MonteCarloConfig& config, WillsEstimator estimator,
                      Execution execution) {
  if (!(lambda > 0.0)) throw DomainError("wills_mc: lambda must be positive");
  const double xi = 0.5 * (1.0 - lambda * lambda);
  const double d = static_cast<double>(cone.ambient_dim());
  ProjectionFunctional f;
  if (estimator == WillsEstimator::Direct) {
    f = [xi](double, double t) { return std::exp(xi * t); };
  } else {
    // g = R theta with R^2 ~ chi-square(d) independent of theta, and
    // t = R^2 tau, so E[exp(xi t) | theta] = (1 - 2 xi tau)^{-d/2}.
    f = [xi, d](double s, double t) {
      const double r2 = s + t;
      const double tau = r2 > 0.0 ? t / r2 : 0.0;
      return std::exp(-0.5 * d * std::log1p(-2.0 * xi * tau));
    };
  }
  const auto est = estimate_functionals(cone, config, {f}, execution);
  const double scale = std::pow(lambda, d);
  return {scale * est[0].mean, scale * est[0].std_error};
}

// ---------------------------------------------------------------------------

namespace {

struct NamedFunctional {
  std::string label;
  BivariateFunctional f;
};

std::vector<NamedFunctional> master_battery() {
  return {
      {"a", {[](double a, double) { return a; }, Integrability::Polynomial}},
      {"b", {[](double, double b) { return b; }, Integrability::Polynomial}},
      {"a^2", {[](double a, double) { return a * a; }, Integrability::Polynomial}},
      {"min(a,10)", {[](double a, double) { return std::min(a, 10.0); }, Integrability::Bounded, 0.0, false}},
      {"exp(a/4)", {[](double a, double) { return std::exp(0.25 * a); }, Integrability::Exponential, 0.25}},
  };
}

SteinerCheckRow make_row(std::string label, double lambda, double mixture, double mc, double se) {
  SteinerCheckRow row;
  row.label = std::move(label);
  row.lambda = lambda;
  row.mixture = mixture;
  row.mc = mc;
  row.diff = std::abs(mixture - mc);
  row.std_error = se;
  row.ok = row.diff <= 4.0 * se + 0.01;
  return row;
}

}  // namespace

std::vector<SteinerCheckRow> steiner_check(SteinerCheck kind, const Cone& cone, const IntrinsicVolumeProfile& profile,
                                           const std::vector<double>& lambdas, const MonteCarloConfig& config,
                                           Execution execution) {
  if (profile.d != cone.ambient_dim()) throw DimensionMismatch("steiner_check: profile and cone dimensions differ");
  std::vector<SteinerCheckRow> rows;
  std::vector<ProjectionFunctional> fs;
  if (kind == SteinerCheck::Master) {
    const auto battery = master_battery();
    for (const auto& nf : battery) fs.push_back([g = nf.f.f](double s, double t) { return g(s, t); });
    const auto mc = estimate_functionals(cone, config, fs, execution);
    for (std::size_t i = 0; i < battery.size(); ++i) {
      const auto phi = master_phi(battery[i].f, profile, config.seed);
      const double se = std::hypot(mc[i].std_error, phi.std_error);
      rows.push_back(make_row(battery[i].label, 0.0, phi.value, mc[i].mean, se));
    }
    return rows;
  }
  for (double lambda : lambdas) {
    if (kind == SteinerCheck::Gaussian) {
      fs.push_back([lambda](double, double t) { return t <= lambda ? 1.0 : 0.0; });
    } else {
      // dist^2(theta, C) = t / (s + t) for theta = g / ||g||.
      fs.push_back([lambda](double s, double t) { return t <= lambda * (s + t) ? 1.0 : 0.0; });
    }
  }
  const auto mc = estimate_functionals(cone, config, fs, execution);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double mix = kind == SteinerCheck::Gaussian ? gaussian_steiner_cdf(profile, lambdas[i])
                                                      : spherical_steiner_cdf(profile, lambdas[i]);
    rows.push_back(make_row(kind == SteinerCheck::Gaussian ? "gaussian" : "spherical", lambdas[i], mix, mc[i].mean,
                            mc[i].std_error));
  }
  return rows;
}

}  // namespace conevol
