#include "conevol/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "conevol/error.hpp"

namespace conevol {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr double kFractionStop = 1e-14;
constexpr int kMaxTerms = 100000;

// Lentz evaluation of the continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kFractionStop) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Modified Lentz for the incomplete beta continued fraction.
double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxTerms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kFractionStop) break;
  }
  return h;
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  static constexpr std::array<double, 9> kLanczos = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    return std::log(std::numbers::pi / std::abs(std::sin(std::numbers::pi * x))) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double s = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) s += kLanczos[i] / (z + static_cast<double>(i));
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(s);
}

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma_p: shape must be positive");
  if (x < 0.0) throw DomainError("gamma_p: argument must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double chi_square_cdf(int dof, double lambda) {
  if (dof < 0) throw DomainError("chi_square_cdf: negative degrees of freedom");
  if (!(lambda >= 0.0)) throw DomainError("chi_square_cdf: negative threshold");
  if (dof == 0) return 1.0;
  return gamma_p(0.5 * dof, 0.5 * lambda);
}

double beta_cdf(double a, double b, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("beta_cdf: threshold outside [0, 1]");
  if (a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0)) throw DomainError("beta_cdf: invalid shape parameters");
  if (a == 0.0) return 1.0;
  if (b == 0.0) return lambda < 1.0 ? 0.0 : 1.0;
  if (lambda == 0.0) return 0.0;
  if (lambda == 1.0) return 1.0;
  const double front = std::exp(log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(lambda) +
                                b * std::log1p(-lambda));
  if (lambda < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, lambda) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - lambda) / b;
}

double bennett_psi(double u) {
  if (std::isnan(u)) return u;
  if (u < -1.0) return std::numeric_limits<double>::infinity();
  if (u == -1.0) return 1.0;
  if (std::abs(u) < 1e-3) {
    // psi(u) = sum_{k>=2} (-1)^k u^k / (k (k-1))
    const double u2 = u * u;
    return u2 * (0.5 - u / 6.0 + u2 / 12.0 - u2 * u / 20.0 + u2 * u2 / 30.0);
  }
  return (1.0 + u) * std::log1p(u) - u;
}

double binomial_pmf(int n, double p, int k) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_pmf: probability outside [0, 1]");
  if (n < 0) throw DomainError("binomial_pmf: negative trial count");
  if (k < 0 || k > n) return 0.0;
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double log_choose = log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
  return std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
}

double binomial_tail(int n, double p, int k) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_tail: probability outside [0, 1]");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double sum = 0.0;
  for (int j = n; j >= k; --j) sum += binomial_pmf(n, p, j);
  return std::min(sum, 1.0);
}

// ---------------------------------------------------------------------------
// Quadrature

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw DomainError("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.kind = QuadratureKind::Legendre;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) {
        // one more derivative evaluation at the converged node
        p1 = 1.0;
        p2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        break;
      }
    }
    const double w = 2.0 * half / ((1.0 - z * z) * pp * pp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

QuadratureRule gauss_laguerre(std::size_t n, double alpha) {
  if (n == 0) throw DomainError("gauss_laguerre: need at least one node");
  if (!(alpha > -1.0)) throw DomainError("gauss_laguerre: alpha must exceed -1");

  // Golub-Welsch: eigenvalues of the Jacobi matrix are the nodes; squared first
  // eigenvector components are the normalized weights.
  std::vector<double> diag(n);
  std::vector<double> off(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = 2.0 * i + alpha + 1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) off[i] = std::sqrt((i + 1.0) * (i + 1.0 + alpha));
  std::vector<double> z(n, 0.0);
  z[0] = 1.0;

  // Implicit QL with Wilkinson shifts, tracking the first eigenvector row only.
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
        if (std::abs(off[m]) <= kEps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw NonConvergence("gauss_laguerre: QL iteration cap exceeded", 60);
        double g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
        double r = std::hypot(g, 1.0);
        g = diag[m] - diag[l] + off[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          const double f = s * off[i];
          const double b = c * off[i];
          r = std::hypot(f, g);
          off[i + 1] = r;
          if (r == 0.0) {
            diag[i + 1] -= p;
            off[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = diag[i + 1] - p;
          r = (diag[i] - g) * s + 2.0 * c * b;
          p = s * r;
          diag[i + 1] = g + p;
          g = c * r - b;
          const double zf = z[i + 1];
          z[i + 1] = s * z[i] + c * zf;
          z[i] = c * z[i] - s * zf;
        }
        if (underflow) continue;
        diag[l] -= p;
        off[l] = g;
        off[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return diag[i] < diag[j]; });
  QuadratureRule rule;
  rule.kind = QuadratureKind::Laguerre;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = diag[order[i]];
    rule.weights[i] = z[order[i]] * z[order[i]];
  }
  return rule;
}

}  // namespace conevol
