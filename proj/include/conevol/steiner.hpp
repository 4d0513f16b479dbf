#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "conevol/profiles.hpp"
#include "conevol/sampling.hpp"

namespace conevol {

enum class Integrability { Bounded, Polynomial, Exponential };

/// A functional f(a, b) on R+^2 with its declared growth class. For the
/// exponential class, |f(a, b)| <= c * exp(xi * (a + b)) with xi < 1/2.
struct BivariateFunctional {
  std::function<double(double a, double b)> f;
  Integrability tag = Integrability::Bounded;
  double xi = 0.0;
  /// Declared by the caller; non-smooth functionals fall back to Monte Carlo.
  bool smooth = true;
};

/// Rejects xi >= 1/2 (divergent) and evaluation rules that return non-finite
/// values on the quadrature probe grid.
void validate(const BivariateFunctional& f);

/// E f(X_k, X'_{d-k}) for independent chi-square variables.
/// Smooth functionals use a 96 x 96 Gauss-Laguerre tensor rule (std_error 0);
/// non-smooth ones use 10^6 chi-square draws seeded by `seed`.
Estimate subspace_moment(const BivariateFunctional& f, std::size_t k, std::size_t d, std::uint64_t seed = 0);

/// E f(||Pi_C g||^2, ||Pi_{C polar} g||^2) = sum_k subspace_moment(f, k, d) v_k.
Estimate master_phi(const BivariateFunctional& f, const IntrinsicVolumeProfile& profile, std::uint64_t seed = 0);

/// P{dist^2(g, C) <= lambda} = sum_k chi_square_cdf(d - k, lambda) v_k.
double gaussian_steiner_cdf(const IntrinsicVolumeProfile& profile, double lambda);

/// P{dist^2(theta, C) <= lambda} for theta uniform on the sphere, lambda in [0, 1].
double spherical_steiner_cdf(const IntrinsicVolumeProfile& profile, double lambda);

/// The chi-bar-squared law of ||Pi_C g||^2.
class ChiBarSquared {
 public:
  explicit ChiBarSquared(IntrinsicVolumeProfile profile);

  double cdf(double lambda) const;
  /// Draws K from the profile, then X_K. Same chunk contract as the sampling module.
  std::vector<double> sample(const MonteCarloConfig& config, Execution execution = Execution::Parallel) const;
  const IntrinsicVolumeProfile& profile() const { return profile_; }

 private:
  IntrinsicVolumeProfile profile_;
  std::vector<double> cumulative_;
};

/// sum_k lambda^k v_k.
double wills_functional(const IntrinsicVolumeProfile& profile, double lambda);

enum class WillsEstimator {
  /// Mean of (1 - 2 xi tau)^{-d/2} with tau = t / (s + t): the exact
  /// expectation over ||g|| given the direction. Bounded for lambda > 0.
  Conditional,
  /// Mean of exp(xi t). Infinite variance once xi >= 1/4 (lambda < 1/sqrt(2)).
  Direct,
};

/// lambda^d E exp(xi t) with xi = (1 - lambda^2) / 2 and t = dist^2(g, C).
MeanEstimate wills_mc(const Cone& cone, double lambda, const MonteCarloConfig& config,
                      WillsEstimator estimator = WillsEstimator::Conditional,
                      Execution execution = Execution::Parallel);

enum class SteinerCheck { Gaussian, Spherical, Master };

struct SteinerCheckRow {
  std::string label;
  double lambda = 0.0;
  double mixture = 0.0;
  double mc = 0.0;
  double diff = 0.0;
  double std_error = 0.0;
  bool ok = true;
};

/// Compares the mixture side of a Steiner identity against direct Monte Carlo.
/// Gaussian/Spherical use `lambdas`; Master uses the functionals a, b, a^2,
/// min(a, 10) and exp(a/4) and ignores `lambdas`.
/// A row fails when |diff| > 4 SE + 0.01, SE being the joint standard error.
std::vector<SteinerCheckRow> steiner_check(SteinerCheck kind, const Cone& cone, const IntrinsicVolumeProfile& profile,
                                           const std::vector<double>& lambdas, const MonteCarloConfig& config,
                                           Execution execution = Execution::Parallel);

}  // namespace conevol
