#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "conevol/sampling.hpp"

using namespace conevol;

namespace {

MonteCarloConfig cfg(std::uint64_t seed, std::uint64_t n, std::uint64_t chunk = 1u << 14, int workers = 0) {
  MonteCarloConfig c;
  c.seed = seed;
  c.total_samples = n;
  c.chunk_size = chunk;
  c.workers = workers;
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool identical(const MomentAccumulator& a, const MomentAccumulator& b) {
  return a.n == b.n && same_bits(a.mean, b.mean) && same_bits(a.m2, b.m2) && same_bits(a.m3, b.m3) &&
         same_bits(a.m4, b.m4);
}

bool identical(const SampleSummary& a, const SampleSummary& b) {
  return a.count == b.count && identical(a.s, b.s) && identical(a.t, b.t) && a.face_histogram == b.face_histogram &&
         a.reservoir_s == b.reservoir_s && a.reservoir_t == b.reservoir_t &&
         same_bits(a.max_pythagorean_defect, b.max_pythagorean_defect);
}

}  // namespace

TEST_CASE("gaussian samples are pure functions of their counters") {
  CHECK(gaussian_sample(5, 3, 17, 6) == gaussian_sample(5, 3, 17, 6));
  CHECK(gaussian_sample(5, 3, 17, 6) != gaussian_sample(5, 3, 18, 6));
  CHECK(gaussian_sample(5, 3, 17, 6) != gaussian_sample(6, 3, 17, 6));
  const GaussianStream s(cfg(1, 100, 8), 4);
  CHECK(s.at(8 * 3 + 5) == s.sample(3, 5));
}

TEST_CASE("independent seeds give independent coordinate means") {
  const std::size_t n = 10000;
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m0 += gaussian_sample(0, 0, static_cast<std::uint32_t>(i), 1)[0];
    m1 += gaussian_sample(1, 0, static_cast<std::uint32_t>(i), 1)[0];
  }
  CHECK(std::abs(m0 / n - m1 / n) <= 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("gaussian marginals and squared norm") {
  const auto c = cfg(11, 1000000);
  const auto est = estimate_functionals(Cone::trivial(4), c,
                                        {[](double, double t) { return t; }});
  CHECK(std::abs(est[0].mean - 4.0) <= 0.012);

  MomentAccumulator coord;
  const GaussianStream s(cfg(3, 1000000), 3);
  for (std::uint64_t i = 0; i < 1000000; ++i) coord.add(s.at(i)[1]);
  CHECK(std::abs(coord.mean) <= 4.0 * coord.standard_error());
  CHECK(std::abs(coord.variance() - 1.0) <= 4.0 * std::sqrt(2.0 / 1e6));
}

TEST_CASE("sphere samples") {
  const auto u = sphere_sample(std::vector<double>{3.0, 4.0});
  CHECK(u[0] == doctest::Approx(0.6));
  CHECK(u[1] == doctest::Approx(0.8));
  const std::vector<double> unit = {0.0, 1.0, 0.0};
  CHECK(sphere_sample(unit) == unit);
  CHECK_THROWS_AS(sphere_sample(std::vector<double>{0.0, 0.0}), DomainError);

  double m = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto t = uniform_sphere_sample(4, 0, static_cast<std::uint32_t>(i), 3);
    CHECK(std::abs(std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]) - 1.0) <= 1e-14);
    m += t[0];
  }
  CHECK(std::abs(m / n) <= 0.008);
}

TEST_CASE("moment accumulator merge matches a single pass") {
  std::mt19937_64 rng(8);
  std::exponential_distribution<double> e(0.7);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = e(rng);
  MomentAccumulator all, a, b;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    all.add(xs[i]);
    (i < 1234 ? a : b).add(xs[i]);
  }
  a.merge(b);
  CHECK(a.n == all.n);
  CHECK(a.mean == doctest::Approx(all.mean).epsilon(1e-13));
  CHECK(a.m2 == doctest::Approx(all.m2).epsilon(1e-12));
  CHECK(a.m3 == doctest::Approx(all.m3).epsilon(1e-10));
  CHECK(a.m4 == doctest::Approx(all.m4).epsilon(1e-10));
  // Two-pass reference for the central moments.
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double c2 = 0.0, c3 = 0.0, c4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    c2 += d * d;
    c3 += d * d * d;
    c4 += d * d * d * d;
  }
  CHECK(all.m2 == doctest::Approx(c2).epsilon(1e-12));
  CHECK(all.m3 == doctest::Approx(c3).epsilon(1e-10));
  CHECK(all.m4 == doctest::Approx(c4).epsilon(1e-10));
}

TEST_CASE("run_summary examples") {
  const auto sub = run_summary(Cone::subspace(3, 8), cfg(2, 20000));
  CHECK(sub.count == 20000);
  REQUIRE(sub.face_histogram.size() == 9);
  CHECK(sub.face_histogram[3] == 20000);
  CHECK(std::abs(sub.s.mean - 3.0) <= 4.0 * sub.s.standard_error());
  CHECK(sub.max_pythagorean_defect <= 1e-12);

  const auto o = run_summary(Cone::orthant(10), cfg(3, 200000));
  CHECK(std::abs(o.s.mean - 5.0) <= 0.05);
  CHECK(std::abs(o.s.mean + o.t.mean - 10.0) <= 3.0 * std::hypot(o.s.standard_error(), o.t.standard_error()) + 0.05);

  const auto tr = run_summary(Cone::trivial(5), cfg(4, 50000));
  CHECK(tr.s.mean == 0.0);
  CHECK(std::abs(tr.t.mean - 5.0) <= 3.0 * tr.t.standard_error());
}

TEST_CASE("product summaries add part-wise norms per sample") {
  const Cone a = Cone::orthant(3), b = Cone::circular(4, 0.4);
  const Cone p = Cone::product(a, b);
  const GaussianStream s(cfg(5, 100), 7);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto g = s.at(i);
    const auto whole = project(p, g);
    const auto left = project(a, std::span<const double>(g).subspan(0, 3));
    const auto right = project(b, std::span<const double>(g).subspan(3));
    CHECK(whole.sq_norm_proj == left.sq_norm_proj + right.sq_norm_proj);
  }
}

TEST_CASE("serial and parallel reductions are bit-identical") {
  for (const Cone& cone : {Cone::orthant(6), Cone::circular(9, 0.5), Cone::psd(3)}) {
    const auto c = cfg(99, 50000, 1000);
    const auto serial = run_summary(cone, c, {}, Execution::Serial);
    for (int w : {1, 2, 3, 4, 8}) {
      auto cw = c;
      cw.workers = w;
      CHECK(identical(serial, run_summary(cone, cw, {}, Execution::Parallel)));
    }
  }
}

TEST_CASE("reservoir is capped and deterministic") {
  SummaryOptions opt;
  opt.reservoir_cap = 1000;
  const auto a = run_summary(Cone::orthant(4), cfg(1, 12345, 500), opt);
  CHECK(a.reservoir_s.size() <= 1000);
  CHECK(a.reservoir_s.size() >= 500);
  CHECK(a.reservoir_s.size() == a.reservoir_t.size());
  const auto b = run_summary(Cone::orthant(4), cfg(1, 12345, 500), opt, Execution::Serial);
  CHECK(a.reservoir_s == b.reservoir_s);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(run_summary(Cone::orthant(2), cfg(1, 0)), DomainError);
  CHECK_THROWS_AS(run_summary(Cone::orthant(2), cfg(1, 10, 0)), DomainError);
}
