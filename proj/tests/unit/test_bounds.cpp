#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conevol/bounds.hpp"
#include "conevol/error.hpp"
#include "conevol/profiles.hpp"
#include "conevol/special.hpp"

using namespace conevol;

namespace {

struct Tails {
  double upper = 0.0;  // P{V - delta >= lambda}
  double lower = 0.0;  // P{V - delta <= -lambda}
  double se = 0.0;
};

Tails profile_tails(const std::vector<double>& v, double delta, double lambda, const std::vector<double>* se = nullptr) {
  Tails t;
  double var = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double dev = static_cast<double>(k) - delta;
    if (dev >= lambda - 1e-12) t.upper += v[k];
    if (dev <= -lambda + 1e-12) t.lower += v[k];
    if (se) var += (*se)[k] * (*se)[k];
  }
  t.se = std::sqrt(var);
  return t;
}

}  // namespace

TEST_CASE("variance bound") {
  CHECK(variance_bound(5, 5) == 10.0);
  CHECK(variance_bound(0, 7) == 0.0);
  CHECK(variance_bound(16.5, 47.5) == 33.0);
  CHECK(23.25 <= variance_bound(16.5, 47.5));
}

TEST_CASE("exponential moment bound") {
  CHECK(exp_moment_bound(0.0, 5, 5) == 1.0);
  const double first = std::exp((std::exp(0.2) - 1.2) / 2.0 * 5.0);
  CHECK(first == doctest::Approx(1.0550).epsilon(1e-4));
  const double second = std::exp((std::exp(-0.2) + 0.2 - 1.0) / 2.0 * 5.0);
  CHECK(exp_moment_bound(0.1, 5, 5) == doctest::Approx(std::min(first, second)).epsilon(1e-14));
  // Exact binomial Laplace transform of V - 5 for Orthant(10).
  for (double z = -1.0; z <= 1.0 + 1e-12; z += 0.05) {
    double e = 0.0;
    for (int k = 0; k <= 10; ++k) e += binomial_pmf(10, 0.5, k) * std::exp(z * (k - 5));
    CHECK(e <= exp_moment_bound(z, 5, 5) * (1.0 + 1e-12));
  }
}

TEST_CASE("Bennett tails") {
  const auto zero = bennett_tails(0.0, 5, 5);
  CHECK(zero.upper == 1.0);
  CHECK(zero.lower == 1.0);
  CHECK(bennett_tails(5.5, 3, 5).upper == 0.0);
  CHECK(bennett_tails(3.5, 3, 5).lower == 0.0);
  const auto t = bennett_tails(3.0, 5, 5);
  CHECK(56.0 / 1024.0 <= t.upper);
  CHECK(std::abs(t.upper - 0.55783) <= 1e-5);
  CHECK_THROWS_AS(bennett_tails(1.0, 0.0, 5.0), DegenerateCone);
  CHECK_THROWS_AS(bennett_tails(1.0, 5.0, 0.0), DegenerateCone);
  CHECK_THROWS_AS(bennett_tails(-1.0, 5.0, 5.0), DomainError);
}

TEST_CASE("Bennett tails are symmetric for self-dual deltas and monotone") {
  for (double l = 0.0; l <= 12.0; l += 0.25) {
    const auto t = bennett_tails(l, 6, 6);
    CHECK(t.upper == doctest::Approx(t.lower));
  }
  for (double delta : {2.0, 5.0, 16.5}) {
    double prev = 1.0;
    for (double l = 0.0; l <= 3.0 * delta; l += delta / 40.0) {
      const double u = bennett_tails(l, delta, 64.0 - delta).upper;
      CHECK(u <= prev + 1e-15);
      prev = u;
    }
  }
}

TEST_CASE("combined, product and Chebyshev tails") {
  CHECK(combined_tail(0.0, 5, 5) == 2.0);
  CHECK(std::abs(combined_tail(4.0, 5, 5) - 2.0 * std::exp(-4.0 / (5.0 + 4.0 / 3.0))) <= 1e-15);
  CHECK(std::abs(combined_tail(4.0, 5, 5) - 1.0635) <= 1e-4);
  CHECK(2.0 * 11.0 / 1024.0 <= combined_tail(4.0, 5, 5));
  double prev = 2.0;
  for (double l = 0.0; l <= 30.0; l += 0.5) {
    const double c = combined_tail(l, 7, 3);
    CHECK(c <= prev);
    prev = c;
  }

  CHECK(product_tail(3.0, {{4.0, 6.0}}) == combined_tail(3.0, 4.0, 6.0));
  for (double l : {1.0, 2.0, 4.0, 6.0}) CHECK(product_tail(l, {{2, 2}, {3, 3}}) == combined_tail(l, 5, 5));

  CHECK(chebyshev_tail(2.0) == 0.5);
  CHECK(chebyshev_tail(std::sqrt(2.0)) == doctest::Approx(1.0));
  // Orthant(100): P{|V - 50| > 2 sqrt(50)} from the exact binomial.
  double tail = 0.0;
  for (int k = 0; k <= 100; ++k)
    if (std::abs(k - 50.0) > 2.0 * std::sqrt(50.0)) tail += binomial_pmf(100, 0.5, k);
  CHECK(tail <= chebyshev_tail(2.0));
}

TEST_CASE("tail bound report") {
  const auto r = tail_bound_report(0.0, 5, 5);
  CHECK(r.upper == 1.0);
  CHECK(r.lower == 1.0);
  CHECK(r.combined == 2.0);
  CHECK(r.variance_bound == 10.0);
  CHECK(std::isinf(r.chebyshev));
  const auto s = tail_bound_report(2.0 * std::sqrt(5.0), 5, 5);
  CHECK(s.chebyshev == doctest::Approx(0.5));
}

TEST_CASE("circular approximations") {
  const auto a = circular_approximations(64, std::numbers::pi / 6);
  CHECK(a.delta == doctest::Approx(16.5).epsilon(1e-14));
  CHECK(a.variance == doctest::Approx(23.25).epsilon(1e-14));
  for (std::size_t d : {3u, 10u, 16u, 101u})
    CHECK(circular_approximations(d, std::numbers::pi / 4).delta == doctest::Approx(d / 2.0).epsilon(1e-14));
  const auto e = circular_approximations(16, std::numbers::pi / 4);
  CHECK(std::abs(e.eps1_bound - std::sqrt(std::numbers::pi / 8) * 64.0 * std::exp(-7.5 * std::pow(std::numbers::pi / 4, 2))) <=
        1e-12);
  CHECK(std::abs(e.eps1_bound - 0.392) <= 1e-3);
  CHECK(e.eps2_bound == doctest::Approx(18.0 * e.eps1_bound));
  CHECK_THROWS_AS(circular_approximations(16, 0.0), DomainError);
  CHECK_THROWS_AS(circular_approximations(2, 0.5), DomainError);
}

TEST_CASE("circular moments by quadrature") {
  // Self-dual second-order cone: delta = d/2 exactly.
  const auto soc = circular_moments(16, std::numbers::pi / 4);
  CHECK(soc.delta == doctest::Approx(8.0).epsilon(1e-10));
  const auto m = circular_moments(64, std::numbers::pi / 6);
  const auto a = circular_approximations(64, std::numbers::pi / 6);
  CHECK(std::abs(m.delta - a.delta) <= a.eps1_bound + 1e-9);
  CHECK(m.variance > 0.0);
  CHECK(m.variance <= variance_bound(m.delta, 64.0 - m.delta));
}

TEST_CASE("circular interlacing tails") {
  const auto k0 = circular_interlacing_tail(64, std::numbers::pi / 6, 0);
  CHECK(k0.first == 1.0);
  CHECK(k0.second == 1.0);
  for (int k = 1; k <= 5; ++k) {
    const auto b = circular_interlacing_tail(12, 1e-9, k);
    CHECK(b.first <= 1e-12);
    // At k = 1 the upper end is P{Y >= 0} = 1 for every angle.
    if (k >= 2) CHECK(b.second <= 1e-12);
  }
  CHECK(circular_interlacing_tail(12, 1e-9, 1).second == 1.0);
  for (int k = 0; k <= 32; ++k) {
    const auto b = circular_interlacing_tail(64, std::numbers::pi / 6, k);
    CHECK(b.first <= b.second);
  }
  CHECK_THROWS_AS(circular_interlacing_tail(63, 0.5, 3), DomainError);
}

TEST_CASE("circular interlacing bracket contains the estimated tail") {
  // Circular(8, pi/6): d = 8 allows the biorthogonal estimator.
  MonteCarloConfig c;
  c.seed = 12;
  c.total_samples = 1000000;
  const auto p = estimate_profile_biorthogonal(Cone::circular(8, std::numbers::pi / 6), c);
  for (int k = 1; k <= 4; ++k) {
    double tail = 0.0, var = 0.0;
    for (int j = 2 * k; j <= 8; ++j) {
      tail += (*p.raw)[j];
      var += (*p.stderr_v)[j] * (*p.stderr_v)[j];
    }
    const auto b = circular_interlacing_tail(8, std::numbers::pi / 6, k);
    CHECK(tail >= b.first - 4.0 * std::sqrt(var));
    CHECK(tail <= b.second + 4.0 * std::sqrt(var));
  }
}

TEST_CASE("GOE asymptotics") {
  const auto g = goe_variance_asymptotics(6);
  CHECK(std::abs(g.kernel_integral - (1.0 + 16.0 / (std::numbers::pi * std::numbers::pi))) <= 1e-3);
  CHECK(std::abs(g.kernel_integral - 2.6211) <= 1e-3);
  CHECK(std::abs(g.ratio_limit - 0.62114) <= 1e-5);
  CHECK(std::abs(g.var_asymptotic - 9.0 * (16.0 / (std::numbers::pi * std::numbers::pi) - 1.0)) <= 1e-12);
  CHECK(std::abs(g.var_asymptotic - 5.590) <= 1e-3);
}

TEST_CASE("bound validity over the regression cones") {
  const double pi = std::numbers::pi;
  MonteCarloConfig c;
  c.seed = 21;
  c.total_samples = 200000;
  auto psd = estimate_profile_biorthogonal(Cone::psd(4), c);

  for (double l : {1.0, 2.0, 4.0, 8.0}) {
    // Exact laws: Orthant(10), Orthant(4) x Orthant(6), Subspace(3, 8).
    const auto o10 = exact_profile(Cone::orthant(10));
    const auto t = profile_tails(o10.v, 5.0, l);
    const auto b = bennett_tails(l, 5, 5);
    CHECK(t.upper <= b.upper);
    CHECK(t.lower <= b.lower);
    CHECK(t.upper + t.lower <= combined_tail(l, 5, 5));
    CHECK(t.upper + t.lower <= product_tail(l, {{2, 2}, {3, 3}}));

    const auto s = profile_tails(exact_profile(Cone::subspace(3, 8)).v, 3.0, l);
    CHECK(s.upper + s.lower == 0.0);

    // Circular cones through the upper ends of the interlacing brackets.
    for (const auto& [d, alpha] : std::vector<std::pair<std::size_t, double>>{{64, pi / 6}, {16, pi / 4}}) {
      const auto m = circular_moments(d, alpha);
      const auto bt = bennett_tails(l, m.delta, d - m.delta);
      const double up = circular_tail_bracket(d, alpha, static_cast<int>(std::ceil(m.delta + l))).second;
      const double low = 1.0 - circular_tail_bracket(d, alpha, static_cast<int>(std::floor(m.delta - l)) + 1).first;
      CHECK(up <= bt.upper);
      CHECK(low <= bt.lower);
      CHECK(up + low <= combined_tail(l, m.delta, d - m.delta));
    }

    // Psd(4) from the biorthogonal estimate, with 4-SE slack.
    const auto pt = profile_tails(*psd.raw, 5.0, l, &*psd.stderr_v);
    const auto bp = bennett_tails(l, 5, 5);
    CHECK(pt.upper <= bp.upper + 4.0 * pt.se);
    CHECK(pt.lower <= bp.lower + 4.0 * pt.se);
  }
}
