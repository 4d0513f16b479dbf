#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conevol/error.hpp"
#include "conevol/special.hpp"
#include "conevol/steiner.hpp"

using namespace conevol;

namespace {

MonteCarloConfig cfg(std::uint64_t seed, std::uint64_t n) {
  MonteCarloConfig c;
  c.seed = seed;
  c.total_samples = n;
  return c;
}

BivariateFunctional smooth(std::function<double(double, double)> f, Integrability tag = Integrability::Polynomial,
                           double xi = 0.0) {
  return {std::move(f), tag, xi, true};
}

IntrinsicVolumeProfile indicator(std::size_t k, std::size_t d) { return exact_profile(Cone::subspace(k, d)); }

}  // namespace

TEST_CASE("subspace moments") {
  const auto a = subspace_moment(smooth([](double a, double) { return a; }), 7, 12);
  CHECK(std::abs(a.value - 7.0) <= 1e-8 * 7.0);
  CHECK(a.std_error == 0.0);
  const auto a2 = subspace_moment(smooth([](double a, double) { return a * a; }), 3, 8);
  CHECK(std::abs(a2.value - 15.0) <= 1e-8 * 15.0);
  const auto e = subspace_moment(
      smooth([](double a, double) { return std::exp(0.25 * a); }, Integrability::Exponential, 0.25), 4, 9);
  CHECK(std::abs(e.value - 4.0) <= 1e-8 * 4.0);
  // Degenerate axes: k = 0 and k = d collapse to one chi-square variable.
  const auto b0 = subspace_moment(smooth([](double a, double b) { return a + b * b; }), 0, 5);
  CHECK(std::abs(b0.value - 35.0) <= 1e-8 * 35.0);
  const auto ad = subspace_moment(smooth([](double a, double b) { return a * a + b; }), 5, 5);
  CHECK(std::abs(ad.value - 35.0) <= 1e-8 * 35.0);
  // Mixed moment E[X_3 X'_5] = 15.
  const auto ab = subspace_moment(smooth([](double a, double b) { return a * b; }), 3, 8);
  CHECK(std::abs(ab.value - 15.0) <= 1e-8 * 15.0);
}

TEST_CASE("non-smooth functionals fall back to Monte Carlo") {
  BivariateFunctional f{[](double a, double) { return a <= 3.0 ? 1.0 : 0.0; }, Integrability::Bounded, 0.0, false};
  const auto m = subspace_moment(f, 4, 6, 11);
  CHECK(m.std_error > 0.0);
  CHECK(std::abs(m.value - chi_square_cdf(4, 3.0)) <= 4.0 * m.std_error);
}

TEST_CASE("functional validation") {
  CHECK_THROWS_AS(validate(smooth([](double a, double) { return std::exp(0.6 * a); }, Integrability::Exponential, 0.6)),
                  DomainError);
  CHECK_THROWS_AS(validate(smooth([](double a, double) { return std::exp(a); }, Integrability::Bounded)), DomainError);
  CHECK_THROWS_AS(validate(smooth([](double a, double) { return std::log(a - 1.0); })), DomainError);
  CHECK_NOTHROW(validate(smooth([](double a, double b) { return a * b; })));
}

TEST_CASE("master formula on exact profiles") {
  const auto o10 = exact_profile(Cone::orthant(10));
  CHECK(std::abs(master_phi(smooth([](double a, double) { return a; }), o10).value - 5.0) <= 1e-8);
  for (const auto& p : {o10, exact_profile(Cone::orthant(3)), indicator(2, 7)})
    CHECK(std::abs(master_phi(smooth([](double, double) { return 1.0; }, Integrability::Bounded), p).value - 1.0) <=
          1e-12);
  const auto o4 = exact_profile(Cone::orthant(4));
  CHECK(std::abs(master_phi(smooth([](double a, double) { return a * a; }), o4).value - 9.0) <= 1e-8);
}

TEST_CASE("master identity against direct Monte Carlo on the orthant") {
  const Cone cone = Cone::orthant(8);
  const auto profile = exact_profile(cone);
  const std::vector<BivariateFunctional> fs = {
      smooth([](double a, double) { return a; }),
      smooth([](double, double b) { return b; }),
      smooth([](double a, double) { return a * a; }),
      {[](double a, double) { return std::min(a, 10.0); }, Integrability::Bounded, 0.0, false},
      smooth([](double a, double) { return std::exp(a / 4.0); }, Integrability::Exponential, 0.25),
  };
  std::vector<ProjectionFunctional> direct;
  for (const auto& f : fs) direct.push_back(f.f);
  const auto mc = estimate_functionals(cone, cfg(3, 1000000), direct);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto phi = master_phi(fs[i], profile, 17);
    CHECK(std::abs(phi.value - mc[i].mean) <= 4.0 * std::hypot(phi.std_error, mc[i].std_error));
  }
}

TEST_CASE("Gaussian Steiner cdf") {
  for (double l : {0.5, 2.0, 7.0}) CHECK(gaussian_steiner_cdf(indicator(3, 8), l) == doctest::Approx(chi_square_cdf(5, l)));
  const auto o8 = exact_profile(Cone::orthant(8));
  CHECK(gaussian_steiner_cdf(o8, 1e4) == doctest::Approx(1.0));
  // v_8 is the mass at dist = 0.
  CHECK(gaussian_steiner_cdf(o8, 0.0) == doctest::Approx(1.0 / 256.0));
  double prev = 0.0;
  for (double l = 0.0; l <= 60.0; l += 0.5) {
    const double c = gaussian_steiner_cdf(o8, l);
    CHECK(c >= prev - 1e-15);
    CHECK(c <= 1.0 + 1e-12);
    prev = c;
  }
  const auto mc =
      estimate_functionals(Cone::orthant(8), cfg(4, 1000000), {[](double, double t) { return t <= 2.0 ? 1.0 : 0.0; }});
  CHECK(std::abs(gaussian_steiner_cdf(o8, 2.0) - mc[0].mean) <= 0.01);
}

TEST_CASE("spherical Steiner cdf") {
  const auto o6 = exact_profile(Cone::orthant(6));
  CHECK(spherical_steiner_cdf(o6, 1.0) == doctest::Approx(1.0));
  for (double l : {0.0, 0.3, 0.9, 1.0}) CHECK(spherical_steiner_cdf(indicator(5, 5), l) == doctest::Approx(1.0));
  const auto mc = estimate_functionals(Cone::orthant(6), cfg(5, 1000000),
                                       {[](double s, double t) { return t <= 0.5 * (s + t) ? 1.0 : 0.0; }});
  CHECK(std::abs(spherical_steiner_cdf(o6, 0.5) - mc[0].mean) <= 0.01);
  CHECK_THROWS_AS(spherical_steiner_cdf(o6, 1.5), DomainError);
}

TEST_CASE("chi-bar-squared law") {
  const ChiBarSquared ind(indicator(4, 9));
  for (double l : {0.0, 1.0, 3.5, 12.0}) CHECK(ind.cdf(l) == doctest::Approx(chi_square_cdf(4, l)));

  const auto o10 = exact_profile(Cone::orthant(10));
  const ChiBarSquared cb(o10);
  CHECK(cb.cdf(0.0) == doctest::Approx(o10.v[0]));
  const auto draws = cb.sample(cfg(6, 200000));
  double mean = 0.0;
  for (double x : draws) mean += x;
  mean /= static_cast<double>(draws.size());
  CHECK(std::abs(mean - 5.0) <= 0.05);

  // s for C is t for the polar cone.
  const auto p = exact_profile(Cone::product(Cone::orthant(3), Cone::subspace(2, 5)));
  const ChiBarSquared law(p);
  for (double l : {0.0, 0.7, 2.0, 6.0, 15.0}) CHECK(law.cdf(l) == doctest::Approx(gaussian_steiner_cdf(p.reversed(), l)));
}

TEST_CASE("Wills functional") {
  const auto o8 = exact_profile(Cone::orthant(8));
  CHECK(wills_functional(o8, 1.0) == doctest::Approx(1.0));
  CHECK(std::abs(wills_functional(o8, 0.5) - 0.1001129150390625) <= 1e-15);
  CHECK(wills_functional(o8, 0.5) == std::pow(0.75, 8));

  // Wills consistency: W(lambda) = lambda^d * E exp((1 - lambda^2) b / 2).
  for (double l : {0.75, 0.9, 1.3, 2.0}) {
    const double xi = 0.5 * (1.0 - l * l);
    const auto phi = master_phi(smooth([xi](double, double b) { return std::exp(xi * b); }, Integrability::Exponential,
                                       std::max(xi, 0.0)),
                                o8);
    CHECK(std::abs(std::pow(l, 8) * phi.value - wills_functional(o8, l)) <= 1e-8);
  }

  const auto mc = wills_mc(Cone::orthant(8), 0.5, cfg(7, 1000000));
  CHECK(std::abs(mc.mean - 0.1001129150390625) <= 0.005);
  CHECK_THROWS_AS(wills_functional(o8, 0.0), DomainError);
}

TEST_CASE("Steiner check rows") {
  const Cone cone = Cone::orthant(6);
  const auto rows = steiner_check(SteinerCheck::Gaussian, cone, exact_profile(cone), {0.5, 2.0, 6.0}, cfg(8, 200000));
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.ok);
  const auto master = steiner_check(SteinerCheck::Master, cone, exact_profile(cone), {}, cfg(9, 200000));
  CHECK(master.size() == 5);
}
