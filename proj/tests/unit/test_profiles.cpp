#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conevol/error.hpp"
#include "conevol/profiles.hpp"
#include "conevol/special.hpp"

using namespace conevol;

namespace {

MonteCarloConfig cfg(std::uint64_t seed, std::uint64_t n) {
  MonteCarloConfig c;
  c.seed = seed;
  c.total_samples = n;
  return c;
}

std::vector<double> binomial_half(int d) {
  std::vector<double> v;
  for (int k = 0; k <= d; ++k) v.push_back(binomial_pmf(d, 0.5, k));
  return v;
}

std::vector<double> se_of(const IntrinsicVolumeProfile& p) {
  return p.stderr_v ? *p.stderr_v : std::vector<double>(p.v.size(), 0.0);
}

// Largest |a - b| / joint SE; exact agreement counts as 0.
double max_z(const IntrinsicVolumeProfile& a, const IntrinsicVolumeProfile& b) {
  const auto sa = se_of(a), sb = se_of(b);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.v.size(); ++k) {
    const double diff = std::abs(a.v[k] - b.v[k]);
    if (diff <= 1e-12) continue;
    const double se = std::hypot(sa[k], sb[k]);
    worst = std::max(worst, se > 0.0 ? diff / se : INFINITY);
  }
  return worst;
}

}  // namespace

TEST_CASE("exact profiles") {
  const auto o3 = exact_profile(Cone::orthant(3));
  CHECK(o3.v == std::vector<double>{0.125, 0.375, 0.375, 0.125});
  CHECK(o3.provenance == Provenance::Exact);

  // Convolution of binomials is the binomial; dyadic values make this exact.
  const auto prod = exact_profile(Cone::product(Cone::orthant(4), Cone::orthant(6)));
  CHECK(prod.v == exact_profile(Cone::orthant(10)).v);
  for (int k = 0; k <= 10; ++k) CHECK(std::abs(prod.v[k] - binomial_pmf(10, 0.5, k)) <= 1e-15);

  CHECK(exact_profile(Cone::polar(Cone::subspace(1, 3))).v == std::vector<double>{0, 0, 1, 0});
  CHECK(exact_profile(Cone::trivial(2)).v == std::vector<double>{1, 0, 0});
  CHECK(exact_profile(Cone::subspace(2, 4)).v == std::vector<double>{0, 0, 1, 0, 0});
  CHECK_THROWS_AS(exact_profile(Cone::psd(3)), UnsupportedVariant);
  CHECK_THROWS_AS(exact_profile(Cone::circular(4, 0.3)), UnsupportedVariant);
}

TEST_CASE("exact orthant profile for large d stays normalized") {
  const auto p = exact_profile(Cone::orthant(2000));
  double total = 0.0;
  for (double v : p.v) total += v;
  CHECK(std::abs(total - 1.0) <= 1e-9);
  CHECK(std::abs(p.mean() - 1000.0) <= 1e-8);
  CHECK(std::abs(p.variance() - 500.0) <= 1e-6);
}

TEST_CASE("profile mean, variance and reversal") {
  const auto p = exact_profile(Cone::orthant(10));
  CHECK(p.mean() == doctest::Approx(5.0));
  CHECK(p.variance() == doctest::Approx(2.5));
  const auto s = exact_profile(Cone::product(Cone::orthant(3), Cone::subspace(2, 2)));
  const auto r = s.reversed();
  for (std::size_t k = 0; k <= s.d; ++k) CHECK(r.v[k] == s.v[s.d - k]);
  CHECK(exact_profile(Cone::polar(Cone::product(Cone::orthant(3), Cone::subspace(2, 2)))).v == r.v);
}

TEST_CASE("normalized estimates clamp and keep the raw values") {
  const auto p = normalized_estimate({-0.01, 0.51, 0.52}, std::nullopt, Provenance::MonteCarloMixture);
  CHECK(p.v[0] == 0.0);
  CHECK(p.v[1] + p.v[2] == doctest::Approx(1.0));
  REQUIRE(p.raw);
  CHECK((*p.raw)[0] == -0.01);
}

TEST_CASE("convolution") {
  const auto a = exact_profile(Cone::orthant(2));
  const auto b = exact_profile(Cone::subspace(1, 3));
  const auto c = convolve(a, b);
  CHECK(c.d == 5);
  CHECK(c.v == std::vector<double>{0, 0.25, 0.5, 0.25, 0, 0});
  // Exact parts stay exact; estimated parts are tagged as a convolution.
  CHECK(c.provenance == Provenance::Exact);
  const auto est = convolve(a, estimate_profile_face(Cone::orthant(1), cfg(1, 100)));
  CHECK(est.provenance == Provenance::Convolution);
}

TEST_CASE("circular odd profile") {
  const auto p = circular_odd_profile(4, std::numbers::pi / 4);
  REQUIRE(p.size() == 2);
  CHECK(p[0].first == 1);
  CHECK(p[1].first == 3);
  CHECK(p[0].second == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p[1].second == doctest::Approx(0.25).epsilon(1e-14));
  const auto z = circular_odd_profile(4, 1e-9);
  CHECK(std::abs(z[0].second - 0.5) <= 1e-12);
  CHECK(std::abs(z[1].second) <= 1e-12);
  double odd = 0.0;
  for (const auto& [k, v] : circular_odd_profile(64, std::numbers::pi / 6)) odd += v;
  CHECK(std::abs(odd - 0.5) <= 1e-12);
  CHECK_THROWS_AS(circular_odd_profile(5, 0.3), DomainError);
}

TEST_CASE("face estimator") {
  const auto o = estimate_profile_face(Cone::orthant(10), cfg(1, 200000));
  const auto exact = binomial_half(10);
  double err = 0.0;
  for (int k = 0; k <= 10; ++k) err = std::max(err, std::abs(o.v[k] - exact[k]));
  CHECK(err <= 0.005);
  CHECK(o.provenance == Provenance::MonteCarloFace);

  const auto s = estimate_profile_face(Cone::subspace(2, 6), cfg(2, 1000));
  CHECK(s.v == std::vector<double>{0, 0, 1, 0, 0, 0, 0});
  for (double se : *s.stderr_v) CHECK(se == 0.0);

  const Cone pc = Cone::product(Cone::orthant(2), Cone::subspace(1, 3));
  const auto p = estimate_profile_face(pc, cfg(3, 100000));
  CHECK(max_z(p, exact_profile(pc)) <= 4.0);

  CHECK_THROWS_AS(estimate_profile_face(Cone::psd(3), cfg(1, 10)), UnsupportedVariant);
}

TEST_CASE("biorthogonal system") {
  const auto one = BiorthogonalSystem::build(1);
  CHECK(std::abs(one.gram(1, 1) - 1.0 / (2.0 * std::numbers::pi)) <= 1e-15);
  CHECK(std::abs(one.coefficient(1, 1) - 2.0 * std::numbers::pi) <= 1e-13);
  CHECK(std::abs(one.evaluate(1, 1.7) - 2.0 * std::numbers::pi * chi_basis_function(1, 1.7)) <= 1e-13);

  for (std::size_t d = 1; d <= 12; ++d) {
    const auto sys = BiorthogonalSystem::build(d);
    CHECK(sys.quadrature_defect() <= 1e-8);
    CHECK(sys.refinement_residual() <= 1e-8);
  }
  const auto twenty = BiorthogonalSystem::build(20);
  CHECK(twenty.condition() > 1e10);
  CHECK(twenty.refinement_residual() <= 1e-8);

  CHECK_THROWS_AS(BiorthogonalSystem::build(0), GuardError);
  CHECK_THROWS_AS(BiorthogonalSystem::build(21), GuardError);
}

TEST_CASE("biorthogonal Gram entries match the closed form") {
  const auto sys = BiorthogonalSystem::build(6);
  for (std::size_t k = 1; k <= 6; ++k)
    for (std::size_t l = 1; l <= 6; ++l) {
      const double kl = 0.5 * static_cast<double>(k + l);
      const double closed = std::exp(log_gamma(kl) - kl * std::log(2.0) - log_gamma(0.5 * k) - log_gamma(0.5 * l));
      CHECK(sys.gram(k, l) == doctest::Approx(closed).epsilon(1e-13));
    }
}

TEST_CASE("biorthogonal estimator") {
  const auto o = estimate_profile_biorthogonal(Cone::orthant(8), cfg(4, 1000000));
  REQUIRE(o.raw);
  const auto exact = binomial_half(8);
  for (int k = 0; k <= 8; ++k) CHECK(std::abs((*o.raw)[k] - exact[k]) <= 4.0 * (*o.stderr_v)[k]);

  const auto s = estimate_profile_biorthogonal(Cone::subspace(3, 6), cfg(5, 100000));
  for (int k = 0; k <= 6; ++k) CHECK(std::abs((*s.raw)[k] - (k == 3 ? 1.0 : 0.0)) <= 4.0 * (*s.stderr_v)[k] + 1e-9);

  const auto c = estimate_profile_biorthogonal(Cone::circular(8, std::numbers::pi / 6), cfg(6, 1000000));
  for (const auto& [k, v] : circular_odd_profile(8, std::numbers::pi / 6))
    CHECK(std::abs((*c.raw)[k] - v) <= 4.0 * (*c.stderr_v)[k]);

  CHECK_THROWS_AS(estimate_profile_biorthogonal(Cone::orthant(21), cfg(1, 10)), GuardError);
}

TEST_CASE("mixture estimator") {
  for (std::size_t k : {0u, 2u, 5u}) {
    const auto p = estimate_profile_mixture(Cone::subspace(k, 5), cfg(7 + k, 100000));
    CHECK(p.v[k] >= 0.99);
  }
  const auto psd = estimate_profile_mixture(Cone::psd(4), cfg(8, 1000000));
  CHECK(std::abs(psd.mean() - 5.0) <= 0.1);
  CHECK(psd.provenance == Provenance::MonteCarloMixture);
}

TEST_CASE("fit_mixture recovers a planted chi-bar-squared law") {
  // Exact quantile sample of 0.5 chi2_2 + 0.5 chi2_6 by bisection on the cdf.
  std::vector<double> s;
  for (int i = 0; i < 4000; ++i) {
    const double u = (i + 0.5) / 4000.0;
    double lo = 0.0, hi = 60.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (0.5 * chi_square_cdf(2, mid) + 0.5 * chi_square_cdf(6, mid) < u ? lo : hi) = mid;
    }
    s.push_back(0.5 * (lo + hi));
  }
  const auto p = fit_mixture(6, s);
  CHECK(std::abs(p.v[2] - 0.5) <= 0.02);
  CHECK(std::abs(p.v[6] - 0.5) <= 0.02);
}

TEST_CASE("statistical dimension") {
  const auto sub = run_summary(Cone::subspace(7, 12), cfg(9, 100000));
  const auto d1 = statistical_dimension(sub);
  CHECK(std::abs(d1.value - 7.0) <= 4.0 * d1.std_error);

  const auto o = statistical_dimension(run_summary(Cone::orthant(10), cfg(10, 200000)));
  CHECK(std::abs(o.value - 5.0) <= 4.0 * o.std_error);

  const auto c = statistical_dimension(run_summary(Cone::circular(64, std::numbers::pi / 6), cfg(11, 100000)));
  CHECK(std::abs(c.value - 16.5) <= 0.1);
}

TEST_CASE("intrinsic variance") {
  const auto sub = intrinsic_variance(run_summary(Cone::subspace(4, 9), cfg(12, 100000)));
  CHECK(std::abs(sub.combined.value) <= 4.0 * sub.combined.std_error);

  const auto o = intrinsic_variance(run_summary(Cone::orthant(10), cfg(13, 1000000)));
  CHECK(std::abs(o.combined.value - 2.5) <= 0.1);

  const auto c = intrinsic_variance(run_summary(Cone::circular(64, std::numbers::pi / 6), cfg(14, 1000000)));
  CHECK(std::abs(c.combined.value - 23.25) <= 2.0);
}

TEST_CASE("profile properties on test cones") {
  const Cone cones[] = {Cone::orthant(6), Cone::circular(7, 0.8), Cone::psd(3),
                        Cone::product(Cone::orthant(2), Cone::circular(4, 0.4))};
  std::uint64_t seed = 100;
  for (const Cone& c : cones) {
    const std::size_t d = c.ambient_dim();
    const auto summary = run_summary(c, cfg(seed++, 200000));
    const auto delta = statistical_dimension(summary);
    // Totality.
    const double se_total = std::hypot(delta.std_error, summary.t.standard_error());
    CHECK(std::abs(delta.value + summary.t.mean - static_cast<double>(d)) <= 4.0 * se_total + 1e-9);
    // Variance bound.
    const auto var = intrinsic_variance(summary);
    CHECK(var.combined.value <= 2.0 * std::min(delta.value, d - delta.value) + 4.0 * var.combined.std_error);
    // Mean from the biorthogonal profile against delta.
    const auto p = estimate_profile_biorthogonal(c, cfg(seed++, 200000));
    double mean_raw = 0.0, se_mean2 = 0.0;
    for (std::size_t k = 0; k <= d; ++k) {
      mean_raw += k * (*p.raw)[k];
      se_mean2 += std::pow(k * (*p.stderr_v)[k], 2);
    }
    CHECK(std::abs(mean_raw - delta.value) <= 4.0 * std::sqrt(se_mean2 + delta.std_error * delta.std_error));
    // Polarity reversal.
    const auto q = estimate_profile_biorthogonal(Cone::polar(c), cfg(seed++, 200000));
    IntrinsicVolumeProfile raw_p = p, raw_q = q;
    raw_p.v = *p.raw;
    raw_q.v = *q.raw;
    CHECK(max_z(raw_q, raw_p.reversed()) <= 4.0);
  }
}

TEST_CASE("product rule with estimated profiles") {
  const Cone a = Cone::orthant(3), b = Cone::subspace(2, 4);
  const auto conv = convolve(estimate_profile_face(a, cfg(20, 100000)), estimate_profile_face(b, cfg(21, 100000)));
  const auto whole = estimate_profile_face(Cone::product(a, b), cfg(22, 100000));
  CHECK(max_z(conv, whole) <= 4.0);
}

TEST_CASE("face and biorthogonal estimators agree on the orthant") {
  const auto f = estimate_profile_face(Cone::orthant(10), cfg(30, 1000000));
  auto b = estimate_profile_biorthogonal(Cone::orthant(10), cfg(31, 1000000));
  b.v = *b.raw;
  CHECK(max_z(f, b) <= 4.0);
}

// Unattainable at the stated sample size; see README ("Known failures").
TEST_SUITE("unattainable") {
  TEST_CASE("mixture estimator recovers the orthant profile to 0.01") {
    const auto p = estimate_profile_mixture(Cone::orthant(10), cfg(15, 1000000));
    const auto exact = binomial_half(10);
    double err = 0.0;
    for (int k = 0; k <= 10; ++k) err = std::max(err, std::abs(p.v[k] - exact[k]));
    CHECK(err <= 0.01);
  }

  TEST_CASE("mixture estimator agrees with face counting on the orthant") {
    const auto f = estimate_profile_face(Cone::orthant(10), cfg(32, 1000000));
    const auto m = estimate_profile_mixture(Cone::orthant(10), cfg(33, 1000000));
    CHECK(max_z(f, m) <= 4.0);
  }
}
