#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conevol/cone.hpp"
#include "conevol/sampling.hpp"

namespace conevol {

enum class Provenance { Exact, MonteCarloFace, MonteCarloBiorthogonal, MonteCarloMixture, Convolution };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// The intrinsic volumes (v_0, ..., v_d), i.e. the law of V_C.
struct IntrinsicVolumeProfile {
  std::size_t d = 0;
  std::vector<double> v;
  std::optional<std::vector<double>> stderr_v;
  /// Estimator output before clamping and renormalization.
  std::optional<std::vector<double>> raw;
  Provenance provenance = Provenance::Exact;

  double mean() const;
  double variance() const;
  IntrinsicVolumeProfile reversed() const;
};

/// Clamps entries below zero and renormalizes to unit mass; keeps the input in `raw`.
IntrinsicVolumeProfile normalized_estimate(std::vector<double> raw, std::optional<std::vector<double>> se,
                                           Provenance provenance);

/// Discrete convolution (the profile of a product cone).
IntrinsicVolumeProfile convolve(const IntrinsicVolumeProfile& a, const IntrinsicVolumeProfile& b);

/// Exact profile for Subspace, Orthant, Trivial and Products/Polars of those.
/// Throws UnsupportedVariant otherwise.
IntrinsicVolumeProfile exact_profile(const Cone& cone);

/// (2k+1, v_{2k+1}) for the circular cone in even dimension d = 2(n+1).
std::vector<std::pair<std::size_t, double>> circular_odd_profile(std::size_t d, double alpha);

IntrinsicVolumeProfile profile_from_faces(const SampleSummary& summary);
IntrinsicVolumeProfile estimate_profile_face(const Cone& cone, const MonteCarloConfig& config);

/// Dual functions f_1..f_d of the chi-square densities: E f_j(X_k) = [j == k].
class BiorthogonalSystem {
 public:
  static constexpr std::size_t kMaxDim = 20;

  /// Throws GuardError for d outside [1, 20].
  static BiorthogonalSystem build(std::size_t d);

  std::size_t dim() const { return d_; }

  /// Gram entry <rho_k, rho_l> for 1-based k, l.
  double gram(std::size_t k, std::size_t l) const { return gram_[(k - 1) * d_ + (l - 1)]; }
  /// Coefficient c_{jk} of rho_k in f_j (1-based).
  double coefficient(std::size_t j, std::size_t k) const {
    return coef_[(j - 1) * d_ + (k - 1)];
  }
  /// 1-norm condition number of the Gram matrix.
  double condition() const { return condition_; }
  /// ||G c - I||_inf after refinement.
  double refinement_residual() const { return residual_; }
  /// max over j, k of |E f_j(X_k) - [j == k]|, integrating the chi-square
  /// densities by Gauss-Legendre quadrature in u = sqrt(s/2).
  double quadrature_defect() const;

  /// f_j(s) for 1 <= j <= d.
  double evaluate(std::size_t j, double s) const;
  /// Writes f_1(s), ..., f_d(s) into out[0..d).
  void evaluate_all(double s, std::span<double> out) const;

 private:
  std::size_t d_ = 0;
  std::vector<double> gram_;
  // Coefficients of u^k with u = sqrt(s/2): poly_[(j-1)*d + (k-1)] = c_jk / Gamma(k/2).
  // Kept in quad precision: the terms cancel down to O(1) from O(cond(G)).
  std::vector<__float128> poly_;
  std::vector<double> coef_;
  double condition_ = 0.0;
  double residual_ = 0.0;
};

/// rho_k(s) = s^{k/2} e^{-s/2} / (2^{k/2} Gamma(k/2)).
double chi_basis_function(std::size_t k, double s);

IntrinsicVolumeProfile estimate_profile_biorthogonal(const Cone& cone, const MonteCarloConfig& config,
                                                     Execution execution = Execution::Parallel);

struct MixtureOptions {
  std::uint64_t reservoir_cap = 100000;
  /// Interleaved batches used for the standard errors (0 disables them).
  std::size_t batches = 10;
};

IntrinsicVolumeProfile estimate_profile_mixture(const Cone& cone, const MonteCarloConfig& config,
                                                const MixtureOptions& options = {},
                                                Execution execution = Execution::Parallel);

/// Mixture inversion from a sample of s alone (no SE).
IntrinsicVolumeProfile fit_mixture(std::size_t d, std::vector<double> sample_s);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

Estimate statistical_dimension(const SampleSummary& summary);

struct VarianceEstimate {
  Estimate primal;    // Var[s] - 2 mean(s)
  Estimate polar;     // Var[t] - 2 mean(t)
  Estimate combined;  // precision-weighted average
};

VarianceEstimate intrinsic_variance(const SampleSummary& summary);

}  // namespace conevol
