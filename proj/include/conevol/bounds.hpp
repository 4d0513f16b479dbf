#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace conevol {

/// 2 min(delta, delta_polar).
double variance_bound(double delta, double delta_polar);

/// Bound on E exp(zeta (V - delta)): the smaller of the two exponential-moment branches.
double exp_moment_bound(double zeta, double delta, double delta_polar);

struct BennettTails {
  double upper = 1.0;  // P{V - delta >= lambda}
  double lower = 1.0;  // P{V - delta <= -lambda}
};

/// Bennett-type tails. Throws DegenerateCone when delta or delta_polar is 0.
BennettTails bennett_tails(double lambda, double delta, double delta_polar);

/// 2 exp(-(lambda^2/4) / (min(delta, delta_polar) + lambda/3)); bounds P{|V - delta| >= lambda}.
double combined_tail(double lambda, double delta, double delta_polar);

/// The combined tail for a product cone, with sigma^2 = sum min(delta_i, delta_i polar).
double product_tail(double lambda, const std::vector<std::pair<double, double>>& deltas);

/// 2 / lambda^2 with lambda in units of sqrt(delta).
double chebyshev_tail(double lambda_scaled);

/// Values are reported as computed; bounds above 1 are not clamped.
struct TailBoundReport {
  double lambda = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  double combined = 0.0;
  double variance_bound = 0.0;
  double chebyshev = 0.0;
  double delta = 0.0;
  double delta_polar = 0.0;
};

/// Chebyshev is evaluated at lambda / sqrt(delta) (infinite at lambda = 0).
TailBoundReport tail_bound_report(double lambda, double delta, double delta_polar);

struct CircularApproximations {
  double delta = 0.0;
  double variance = 0.0;
  double eps1_bound = 0.0;
  double eps2_bound = 0.0;
};

/// Closed-form approximations for Circ_d(alpha) with their error bounds.
CircularApproximations circular_approximations(std::size_t d, double alpha);

struct CircularMoments {
  double delta = 0.0;
  double variance = 0.0;
};

/// delta and Var[V] of Circ_d(alpha) by quadrature over the polar angle of g.
CircularMoments circular_moments(std::size_t d, double alpha);

/// [lower, upper] bracketing P{V >= 2k} for Circ_d(alpha), d even.
std::pair<double, double> circular_interlacing_tail(std::size_t d, double alpha, int k);

/// [lower, upper] bracketing P{V >= m} for any integer m, using the exact odd volumes.
std::pair<double, double> circular_tail_bracket(std::size_t d, double alpha, int m);

struct GoeAsymptotics {
  double kernel_integral = 0.0;
  double kernel_error = 0.0;  // estimated quadrature error
  double var_asymptotic = 0.0;
  double ratio_limit = 0.0;
};

/// The GOE double integral for the PSD cone and the resulting variance limits.
GoeAsymptotics goe_variance_asymptotics(std::size_t n);

}  // namespace conevol
