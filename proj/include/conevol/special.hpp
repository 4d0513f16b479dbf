#pragma once

#include <cstddef>
#include <vector>

namespace conevol {

/// log Gamma(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// P{X_dof <= lambda} for a chi-square variable; dof = 0 is the point mass at 0.
double chi_square_cdf(int dof, double lambda);

/// Regularized incomplete beta I_lambda(a, b). A zero shape parameter is the
/// degenerate limit: a = 0 gives the point mass at 0, b = 0 the point mass at 1.
double beta_cdf(double a, double b, double lambda);

/// Bennett function (1+u)log(1+u) - u; +infinity for u < -1.
double bennett_psi(double u);

double binomial_pmf(int n, double p, int k);

/// P{Y >= k} for Y ~ binomial(n, p). k <= 0 gives 1, k > n gives 0.
double binomial_tail(int n, double p, int k);

enum class QuadratureKind { Legendre, Laguerre };

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  QuadratureKind kind = QuadratureKind::Legendre;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

/// n-point generalized Gauss-Laguerre rule for the weight x^alpha e^{-x} on
/// [0, inf). Weights are normalized to sum to one, i.e. the rule computes
/// E[g(Y)] for Y ~ Gamma(alpha + 1, 1).
QuadratureRule gauss_laguerre(std::size_t n, double alpha = 0.0);

}  // namespace conevol
