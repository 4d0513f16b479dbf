#include "conevol/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "conevol/error.hpp"
#include "conevol/special.hpp"

namespace conevol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonnegative(double delta, double delta_polar, const char* who) {
  if (!(delta >= 0.0) || !(delta_polar >= 0.0))
    throw DomainError(std::string(who) + ": statistical dimensions must be nonnegative");
}

// exp(-x/2) with the x = +inf convention giving 0.
double half_decay(double x) { return x == kInf ? 0.0 : std::exp(-0.5 * x); }

}  // namespace

double variance_bound(double delta, double delta_polar) {
  require_nonnegative(delta, delta_polar, "variance_bound");
  return 2.0 * std::min(delta, delta_polar);
}

double exp_moment_bound(double zeta, double delta, double delta_polar) {
  require_nonnegative(delta, delta_polar, "exp_moment_bound");
  // expm1 keeps e^{2z} - 2z - 1 accurate near zeta = 0.
  const double first = 0.5 * (std::expm1(2.0 * zeta) - 2.0 * zeta) * delta;
  const double second = 0.5 * (std::expm1(-2.0 * zeta) + 2.0 * zeta) * delta_polar;
  return std::exp(std::min(first, second));
}

BennettTails bennett_tails(double lambda, double delta, double delta_polar) {
  if (!(lambda >= 0.0)) throw DomainError("bennett_tails: lambda must be nonnegative");
  require_nonnegative(delta, delta_polar, "bennett_tails");
  if (delta == 0.0 || delta_polar == 0.0)
    throw DegenerateCone("bennett_tails: V is deterministic when delta or its polar counterpart is 0");
  BennettTails t;
  t.upper = half_decay(std::max(delta * bennett_psi(lambda / delta), delta_polar * bennett_psi(-lambda / delta_polar)));
  t.lower = half_decay(std::max(delta * bennett_psi(-lambda / delta), delta_polar * bennett_psi(lambda / delta_polar)));
  return t;
}

double combined_tail(double lambda, double delta, double delta_polar) {
  if (!(lambda >= 0.0)) throw DomainError("combined_tail: lambda must be nonnegative");
  require_nonnegative(delta, delta_polar, "combined_tail");
  const double denom = std::min(delta, delta_polar) + lambda / 3.0;
  if (denom == 0.0) return 2.0;
  return 2.0 * std::exp(-0.25 * lambda * lambda / denom);
}

double product_tail(double lambda, const std::vector<std::pair<double, double>>& deltas) {
  if (!(lambda >= 0.0)) throw DomainError("product_tail: lambda must be nonnegative");
  double sigma2 = 0.0;
  for (const auto& [d, dp] : deltas) {
    require_nonnegative(d, dp, "product_tail");
    sigma2 += std::min(d, dp);
  }
  const double denom = sigma2 + lambda / 3.0;
  if (denom == 0.0) return 2.0;
  return 2.0 * std::exp(-0.25 * lambda * lambda / denom);
}

double chebyshev_tail(double lambda_scaled) {
  if (!(lambda_scaled >= 0.0)) throw DomainError("chebyshev_tail: lambda must be nonnegative");
  return 2.0 / (lambda_scaled * lambda_scaled);
}

TailBoundReport tail_bound_report(double lambda, double delta, double delta_polar) {
  TailBoundReport r;
  r.lambda = lambda;
  r.delta = delta;
  r.delta_polar = delta_polar;
  const auto b = bennett_tails(lambda, delta, delta_polar);
  r.upper = b.upper;
  r.lower = b.lower;
  r.combined = combined_tail(lambda, delta, delta_polar);
  r.variance_bound = variance_bound(delta, delta_polar);
  r.chebyshev = chebyshev_tail(lambda / std::sqrt(delta));
  return r;
}

// ---------------------------------------------------------------------------
// Circular cones

namespace {

void check_circular(std::size_t d, double alpha, const char* who) {
  if (d < 3) throw DomainError(std::string(who) + ": dimension must be at least 3");
  if (!(alpha > 0.0 && alpha < std::numbers::pi / 2)) throw DomainError(std::string(who) + ": angle must lie in (0, pi/2)");
}

void check_even(std::size_t d, double alpha, const char* who) {
  if (d % 2 != 0 || d < 4) throw DomainError(std::string(who) + ": dimension must be even and at least 4");
  if (!(alpha > 0.0 && alpha < std::numbers::pi / 2)) throw DomainError(std::string(who) + ": angle must lie in (0, pi/2)");
}

}  // namespace

CircularApproximations circular_approximations(std::size_t d, double alpha) {
  check_circular(d, alpha, "circular_approximations");
  const double dd = static_cast<double>(d);
  const double s = std::sin(alpha);
  const double s2a = std::sin(2.0 * alpha);
  const double m = std::min(alpha, std::numbers::pi / 2 - alpha);
  const double tail = std::sqrt(std::numbers::pi / 8.0) * std::pow(dd, 1.5) * std::exp(-0.5 * (dd - 1.0) * m * m);
  CircularApproximations a;
  a.delta = dd * s * s + std::cos(2.0 * alpha);
  a.variance = 0.5 * (dd - 2.0) * s2a * s2a;
  a.eps1_bound = tail;
  a.eps2_bound = tail * (dd + 2.0);
  return a;
}

CircularMoments circular_moments(std::size_t d, double alpha) {
  check_circular(d, alpha, "circular_moments");
  // The polar angle beta of g has density sin^{d-2}(beta) / Z on [0, pi], and
  // ||Pi_C g||^2 = ||g||^2 H(beta) with H = 1, cos^2(beta - alpha) or 0 on the
  // three arcs. E||g||^2 = d and E||g||^4 = d(d+2).
  const double dd = static_cast<double>(d);
  const double log_z = 0.5 * std::log(std::numbers::pi) + log_gamma(0.5 * (dd - 1.0)) - log_gamma(0.5 * dd);
  const auto density = [&](double beta) { return std::exp((dd - 2.0) * std::log(std::sin(beta)) - log_z); };
  double h1 = 0.0;
  double h2 = 0.0;
  const auto panels = [&](double a, double b, auto&& weight) {
    constexpr int kPanels = 256;
    const auto rule = gauss_legendre(16, 0.0, 1.0);
    const double width = (b - a) / kPanels;
    for (int p = 0; p < kPanels; ++p)
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double beta = a + width * (p + rule.nodes[i]);
        const double w = width * rule.weights[i] * density(beta);
        const double h = weight(beta);
        h1 += w * h;
        h2 += w * h * h;
      }
  };
  panels(0.0, alpha, [](double) { return 1.0; });
  panels(alpha, alpha + std::numbers::pi / 2, [&](double beta) {
    const double c = std::cos(beta - alpha);
    return c * c;
  });
  CircularMoments m;
  m.delta = dd * h1;
  m.variance = dd * (dd + 2.0) * h2 - m.delta * m.delta - 2.0 * m.delta;
  return m;
}

std::pair<double, double> circular_interlacing_tail(std::size_t d, double alpha, int k) {
  check_even(d, alpha, "circular_interlacing_tail");
  const int n = static_cast<int>(d / 2) - 1;
  if (k < 0 || k > n + 1) throw DomainError("circular_interlacing_tail: k must lie in [0, n + 1]");
  const double q = std::sin(alpha) * std::sin(alpha);
  return {binomial_tail(n, q, k), binomial_tail(n, q, k - 1)};
}

std::pair<double, double> circular_tail_bracket(std::size_t d, double alpha, int m) {
  check_even(d, alpha, "circular_tail_bracket");
  if (m <= 0) return {1.0, 1.0};
  if (m > static_cast<int>(d)) return {0.0, 0.0};
  const int n = static_cast<int>(d / 2) - 1;
  const double q = std::sin(alpha) * std::sin(alpha);
  if (m % 2 == 0) return circular_interlacing_tail(d, alpha, m / 2);
  // P{V >= 2k+1} = v_{2k+1} + P{V >= 2k+2}, with v_{2k+1} known exactly.
  const int k = (m - 1) / 2;
  const double odd = 0.5 * binomial_pmf(n, q, k);
  const auto even = circular_interlacing_tail(d, alpha, k + 1);
  return {std::min(1.0, even.first + odd), std::min(1.0, even.second + odd)};
}

// ---------------------------------------------------------------------------
// GOE kernel integral

namespace {

struct TanhSinhResult {
  double value = 0.0;
  double error = 0.0;
};

// Double-exponential quadrature on [a, b]; f(x, x - a, b - x) receives the
// endpoint distances computed without cancellation.
template <class F>
TanhSinhResult tanh_sinh(F&& f, double a, double b, double tol, int max_level = 10) {
  const double half = 0.5 * (b - a);
  constexpr double kTMax = 3.2;
  const auto term = [&](double t) {
    const double y = 0.5 * std::numbers::pi * std::sinh(t);
    const double e = std::exp(2.0 * y);
    const double da = half * 2.0 / (1.0 + e) * e;  // half (1 + tanh y)
    const double db = half * 2.0 / (1.0 + e);      // half (1 - tanh y)
    if (!(da > 0.0) || !(db > 0.0)) return 0.0;
    const double ch = std::cosh(y);
    const double w = half * 0.5 * std::numbers::pi * std::cosh(t) / (ch * ch);
    const double x = t >= 0.0 ? b - db : a + da;
    return w * f(x, da, db);
  };
  double h = 1.0;
  double sum = term(0.0);
  for (double t = h; t <= kTMax; t += h) sum += term(t) + term(-t);
  double estimate = h * sum;
  double err = std::abs(estimate);
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double add = 0.0;
    for (double t = h; t <= kTMax; t += 2.0 * h) add += term(t) + term(-t);
    sum += add;
    const double next = h * sum;
    err = std::abs(next - estimate);
    estimate = next;
    if (level >= 4 && err <= tol * std::max(1.0, std::abs(estimate))) break;
  }
  return {estimate, err};
}

}  // namespace

GoeAsymptotics goe_variance_asymptotics(std::size_t n) {
  if (n < 1) throw DomainError("goe_variance_asymptotics: n must be at least 1");
  // h'(s) = 2 max(s, 0) kills the negative half; by symmetry of the kernel the
  // square [0, 2]^2 is twice the triangle t < s, whose singular edge t = s is
  // an endpoint of the inner rule. (A + B)(A - B) = 4 (s - t)^2 turns the
  // kernel into log((A + B) / (2 |s - t|)) / pi^2 without cancellation.
  // With u = 2 - s and v = 2 - t (both exact from the endpoint distances),
  // 4 - st = 2u + 2v - uv and 4 - s^2 = u (4 - u).
  double inner_err = 0.0;
  const auto inner = [&](double s, double u) {
    const auto r = tanh_sinh(
        [&](double t, double, double gap) {
          const double v = u + gap;
          const double a = 2.0 * u + 2.0 * v - u * v;
          const double b = std::sqrt(u * (4.0 - u) * v * (4.0 - v));
          if (!(a + b > 0.0)) return 0.0;
          return 4.0 * s * t * std::log((a + b) / (2.0 * gap));
        },
        0.0, s, 1e-12);
    inner_err = std::max(inner_err, r.error);
    return r.value;
  };
  const auto outer = tanh_sinh([&](double s, double, double u) { return inner(s, u); }, 0.0, 2.0, 1e-11);
  if (!std::isfinite(outer.value) || outer.error > 1e-6)
    throw NonConvergence("GOE kernel quadrature did not converge", 10);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  GoeAsymptotics g;
  g.kernel_integral = 2.0 * outer.value / pi2;
  g.kernel_error = 2.0 * (outer.error + 2.0 * inner_err) / pi2;
  g.ratio_limit = 16.0 / pi2 - 1.0;
  const double nn = static_cast<double>(n);
  g.var_asymptotic = 0.25 * nn * nn * g.ratio_limit;
  return g;
}

}  // namespace conevol
