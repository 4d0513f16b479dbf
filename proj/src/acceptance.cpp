#include "conevol/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "conevol/bounds.hpp"
#include "conevol/profiles.hpp"
#include "conevol/special.hpp"
#include "conevol/steiner.hpp"

namespace conevol {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, int criterion, int sub) {
  // splitmix64 finalizer over (seed, criterion, sub).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(criterion) * 64 + sub + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Battery {
 public:
  explicit Battery(const AcceptanceOptions& o) : opt_(o) {}

  MonteCarloConfig config(int criterion, int sub, std::uint64_t samples) const {
    MonteCarloConfig c;
    c.seed = derive_seed(opt_.seed, criterion, sub);
    c.total_samples = samples;
    c.chunk_size = opt_.chunk_size;
    c.workers = opt_.workers;
    return c;
  }

  CriterionResult c1() const;
  CriterionResult c2() const;
  CriterionResult c3() const;
  CriterionResult c4() const;
  CriterionResult c5() const;
  CriterionResult c6() const;
  CriterionResult c7() const;
  CriterionResult c8() const;
  CriterionResult c9() const;
  CriterionResult c10() const;
  CriterionResult c11() const;
  CriterionResult c12() const;
  CriterionResult c13() const;

 private:
  AcceptanceOptions opt_;
};

CriterionResult start(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

struct RegressionCone {
  std::string name;
  Cone cone;
};

std::vector<RegressionCone> regression_cones() {
  return {
      {"orthant10", Cone::orthant(10)},
      {"subspace3of8", Cone::subspace(3, 8)},
      {"circ64", Cone::circular(64, std::numbers::pi / 6)},
      {"lorentz16", Cone::second_order(16)},
      {"psd4", Cone::psd(4)},
      {"orthant4xorthant6", Cone::product(Cone::orthant(4), Cone::orthant(6))},
  };
}

// Face counting for polyhedral cones, the biorthogonal system up to d = 12,
// mixture inversion beyond.
IntrinsicVolumeProfile estimate_auto(const Cone& cone, const MonteCarloConfig& cfg) {
  if (cone.is_polyhedral()) return estimate_profile_face(cone, cfg);
  if (cone.ambient_dim() <= 12) return estimate_profile_biorthogonal(cone, cfg);
  return estimate_profile_mixture(cone, cfg);
}

// Entries compared against a tolerance of 4 joint SE. Exact agreement with
// zero SE passes; any disagreement with zero SE fails.
double max_z(const std::vector<double>& a, const std::vector<double>& sa, const std::vector<double>& b,
             const std::vector<double>& sb) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = std::abs(a[k] - b[k]);
    const double se = std::hypot(sa[k], sb[k]);
    if (diff <= 1e-12) continue;
    worst = std::max(worst, se > 0.0 ? diff / se : std::numeric_limits<double>::infinity());
  }
  return worst;
}

std::vector<double> se_vector(const IntrinsicVolumeProfile& p) {
  return p.stderr_v ? *p.stderr_v : std::vector<double>(p.v.size(), 0.0);
}

double binomial_mean_tail_upper(int n, double mean, double lambda) {
  // P{Y - mean >= lambda} for Y ~ binomial(n, 1/2).
  return binomial_tail(n, 0.5, static_cast<int>(std::ceil(mean + lambda - 1e-12)));
}

double binomial_mean_tail_lower(int n, double mean, double lambda) {
  // P{Y - mean <= -lambda} = 1 - P{Y >= floor(mean - lambda) + 1}.
  return 1.0 - binomial_tail(n, 0.5, static_cast<int>(std::floor(mean - lambda + 1e-12)) + 1);
}

CriterionResult Battery::c1() const {
  auto r = start(1, "orthant profile");
  r.runtime_limit = 5.0;
  const auto exact = exact_profile(Cone::orthant(10));
  double exact_err = 0.0;
  for (int k = 0; k <= 10; ++k)
    exact_err = std::max(exact_err, std::abs(exact.v[k] - std::exp(log_gamma(11) - log_gamma(k + 1) -
                                                                   log_gamma(11 - k)) / 1024.0));
  const auto face = estimate_profile_face(Cone::orthant(10), config(1, 0, 200000));
  double face_err = 0.0;
  for (int k = 0; k <= 10; ++k) face_err = std::max(face_err, std::abs(face.v[k] - exact.v[k]));
  r.values = {{"exact_max_err", exact_err}, {"face_max_err", face_err}};
  r.pass = exact_err <= 1e-15 && face_err <= 0.005;
  return r;
}

CriterionResult Battery::c2() const {
  auto r = start(2, "figure-1 circular cone");
  r.runtime_limit = 60.0;
  SummaryOptions so;
  so.reservoir_cap = 0;
  const auto s = run_summary(Cone::circular(64, std::numbers::pi / 6), config(2, 0, 1000000), so);
  const auto delta = statistical_dimension(s);
  const auto var = intrinsic_variance(s);
  r.values = {{"delta", delta.value},       {"delta_se", delta.std_error}, {"variance", var.combined.value},
              {"variance_se", var.combined.std_error}};
  r.pass = std::abs(delta.value - 16.5) <= 0.15 && std::abs(var.combined.value - 23.25) <= 2.0;
  return r;
}

CriterionResult Battery::c3() const {
  auto r = start(3, "psd statistical dimension");
  r.runtime_limit = 60.0;
  SummaryOptions so;
  so.reservoir_cap = 0;
  const auto s = run_summary(Cone::psd(6), config(3, 0, 100000), so);
  const auto delta = statistical_dimension(s);
  r.values = {{"delta", delta.value}, {"delta_se", delta.std_error}};
  r.pass = std::abs(delta.value - 10.5) <= 0.2;
  return r;
}

CriterionResult Battery::c4() const {
  auto r = start(4, "goe kernel integral");
  r.runtime_limit = 10.0;
  const auto g = goe_variance_asymptotics(6);
  const double target = 1.0 + 16.0 / (std::numbers::pi * std::numbers::pi);
  r.values = {{"integral", g.kernel_integral}, {"target", target}, {"abs_err", std::abs(g.kernel_integral - target)}};
  r.pass = std::abs(g.kernel_integral - target) <= 1e-3;
  return r;
}

CriterionResult Battery::c5() const {
  auto r = start(5, "psd variance ratio band");
  SummaryOptions so;
  so.reservoir_cap = 0;
  const auto s = run_summary(Cone::psd(12), config(5, 0, 200000), so);
  const auto delta = statistical_dimension(s);
  const auto var = intrinsic_variance(s);
  const double ratio = var.combined.value / delta.value;
  r.values = {{"delta", delta.value}, {"variance", var.combined.value}, {"ratio", ratio}, {"limit", 16.0 / (std::numbers::pi * std::numbers::pi) - 1.0}};
  r.pass = ratio >= 0.45 && ratio <= 0.80;
  return r;
}

CriterionResult Battery::c6() const {
  auto r = start(6, "gaussian and spherical steiner");
  const auto cone = Cone::orthant(8);
  const auto profile = exact_profile(cone);
  const auto g = steiner_check(SteinerCheck::Gaussian, cone, profile, {0.5, 1, 2, 4, 8}, config(6, 0, 1000000));
  const auto s = steiner_check(SteinerCheck::Spherical, cone, profile, {0.1, 0.25, 0.5, 0.75, 0.9}, config(6, 1, 1000000));
  double gmax = 0.0;
  double smax = 0.0;
  for (const auto& row : g) gmax = std::max(gmax, row.diff);
  for (const auto& row : s) smax = std::max(smax, row.diff);
  r.values = {{"gaussian_max_diff", gmax}, {"spherical_max_diff", smax}};
  r.pass = gmax <= 0.01 && smax <= 0.01;
  return r;
}

CriterionResult Battery::c7() const {
  auto r = start(7, "master steiner functional");
  const auto cone = Cone::orthant(8);
  const auto profile = exact_profile(cone);
  const auto cfg = config(7, 0, 1000000);
  const std::vector<std::pair<std::string, BivariateFunctional>> fs = {
      {"a", {[](double a, double) { return a; }, Integrability::Polynomial}},
      {"a2", {[](double a, double) { return a * a; }, Integrability::Polynomial}},
      {"exp_a4", {[](double a, double) { return std::exp(0.25 * a); }, Integrability::Exponential, 0.25}},
      {"min_a10", {[](double a, double) { return std::min(a, 10.0); }, Integrability::Bounded, 0.0, false}},
  };
  std::vector<ProjectionFunctional> direct;
  for (const auto& [name, f] : fs) direct.push_back([g = f.f](double s, double t) { return g(s, t); });
  const auto mc = estimate_functionals(cone, cfg, direct);
  r.pass = true;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto phi = master_phi(fs[i].second, profile, derive_seed(opt_.seed, 7, 1));
    const double se = std::hypot(mc[i].std_error, phi.std_error);
    const double z = std::abs(phi.value - mc[i].mean) / se;
    r.values.push_back({fs[i].first + "_z", z});
    r.pass = r.pass && z <= 4.0;
  }
  return r;
}

CriterionResult Battery::c8() const {
  auto r = start(8, "biorthogonal system");
  double defect = 0.0;
  for (std::size_t d = 1; d <= 12; ++d) defect = std::max(defect, BiorthogonalSystem::build(d).quadrature_defect());
  const auto exact = exact_profile(Cone::orthant(8));
  const auto est = estimate_profile_biorthogonal(Cone::orthant(8), config(8, 0, 1000000));
  // The raw sample means are the unbiased estimates the SEs describe.
  double zmax = 0.0;
  for (std::size_t k = 0; k <= 8; ++k)
    zmax = std::max(zmax, std::abs((*est.raw)[k] - exact.v[k]) / (*est.stderr_v)[k]);
  r.values = {{"max_quadrature_defect", defect}, {"max_z", zmax}};
  r.pass = defect <= 1e-7 && zmax <= 4.0;
  return r;
}

CriterionResult Battery::c9() const {
  auto r = start(9, "product rule");
  const auto a = exact_profile(Cone::orthant(4));
  const auto b = exact_profile(Cone::orthant(6));
  const auto conv = convolve(a, b);
  const auto whole = exact_profile(Cone::orthant(10));
  double err = 0.0;
  for (std::size_t k = 0; k <= 10; ++k) err = std::max(err, std::abs(conv.v[k] - whole.v[k]));
  const auto mc = estimate_profile_face(Cone::product(Cone::orthant(4), Cone::orthant(6)), config(9, 0, 200000));
  const double z = max_z(mc.v, se_vector(mc), conv.v, se_vector(conv));
  r.values = {{"exact_max_err", err}, {"mc_max_z", z}};
  r.pass = err <= 1e-12 && z <= 4.0;
  return r;
}

CriterionResult Battery::c10() const {
  auto r = start(10, "polarity and totality");
  r.pass = true;
  int sub = 0;
  for (const auto& rc : regression_cones()) {
    const std::size_t d = rc.cone.ambient_dim();
    const auto polar = Cone::polar(rc.cone);
    SummaryOptions so;
    so.reservoir_cap = 0;
    so.face_histogram = false;
    const auto sc = run_summary(rc.cone, config(10, sub++, 200000), so);
    const auto sp = run_summary(polar, config(10, sub++, 200000), so);
    const double total = sc.s.mean + sp.s.mean;
    const double total_se = std::hypot(sc.s.standard_error(), sp.s.standard_error());
    const double total_dev = std::abs(total - static_cast<double>(d));
    const bool total_ok = total_dev <= 4.0 * total_se + 1e-9;

    const auto pc = estimate_auto(rc.cone, config(10, sub++, 200000));
    const auto pp = estimate_auto(polar, config(10, sub++, 200000));
    const auto rev = pc.reversed();
    const double z = max_z(pp.v, se_vector(pp), rev.v, se_vector(rev));
    r.values.push_back({rc.name + "_total_dev", total_dev});
    r.values.push_back({rc.name + "_total_se", total_se});
    r.values.push_back({rc.name + "_reversal_max_z", z});
    r.pass = r.pass && total_ok && z <= 4.0;
  }
  return r;
}

CriterionResult Battery::c11() const {
  auto r = start(11, "variance bound");
  r.pass = true;
  int sub = 0;
  SummaryOptions so;
  so.reservoir_cap = 0;
  so.face_histogram = false;
  for (const auto& rc : regression_cones()) {
    const double d = static_cast<double>(rc.cone.ambient_dim());
    const auto s = run_summary(rc.cone, config(11, sub++, 200000), so);
    const double delta = s.s.mean;
    const auto var = intrinsic_variance(s);
    const double slack = 2.0 * std::min(delta, d - delta) + 4.0 * var.combined.std_error - var.combined.value;
    r.values.push_back({rc.name + "_slack", slack});
    r.pass = r.pass && slack >= 0.0;
  }
  // Saturation direction for a thin circular cone.
  const auto s = run_summary(Cone::circular(400, 0.05), config(11, sub++, 100000), so);
  const auto var = intrinsic_variance(s);
  const double ratio = var.combined.value / s.s.mean;
  const double ratio_se = var.combined.std_error / s.s.mean;
  const auto exact = circular_moments(400, 0.05);
  r.values.push_back({"circ400_ratio", ratio});
  r.values.push_back({"circ400_ratio_se", ratio_se});
  r.values.push_back({"circ400_exact_ratio", exact.variance / exact.delta});
  const bool saturated = ratio >= 1.8 - 4.0 * ratio_se;
  if (!saturated)
    r.note = "circ400(0.05) is far from the d -> infinity regime (sqrt(d) sin(alpha) = 1); exact ratio shown";
  r.pass = r.pass && saturated;
  return r;
}

CriterionResult Battery::c12() const {
  auto r = start(12, "tail bound validity");
  r.pass = true;
  const double lambdas[] = {1, 2, 4, 8};
  double worst = -1.0;  // max over checks of (probability - bound); must stay <= 0
  const auto note = [&](double p, double bound) { worst = std::max(worst, p - bound); };

  // Orthant(10): exact binomial(10, 1/2) tails.
  for (double lambda : lambdas) {
    const auto b = bennett_tails(lambda, 5.0, 5.0);
    const double up = binomial_mean_tail_upper(10, 5.0, lambda);
    const double lo = binomial_mean_tail_lower(10, 5.0, lambda);
    note(up, b.upper);
    note(lo, b.lower);
    note(up + lo, combined_tail(lambda, 5.0, 5.0));
  }
  // Circ64(pi/6): interlacing brackets with the quadrature value of delta.
  const double alpha = std::numbers::pi / 6;
  const auto m = circular_moments(64, alpha);
  for (double lambda : lambdas) {
    const auto b = bennett_tails(lambda, m.delta, 64.0 - m.delta);
    const double up = circular_tail_bracket(64, alpha, static_cast<int>(std::ceil(m.delta + lambda))).second;
    const double lo =
        1.0 - circular_tail_bracket(64, alpha, static_cast<int>(std::floor(m.delta - lambda)) + 1).first;
    note(up, b.upper);
    note(lo, b.lower);
    note(up + lo, combined_tail(lambda, m.delta, 64.0 - m.delta));
  }
  const double tail_worst = worst;
  // Exponential moments of binomial(10, 1/2) around its mean.
  worst = -1.0;
  for (int i = -10; i <= 10; ++i) {
    const double zeta = 0.1 * i;
    const double mgf = std::exp(-5.0 * zeta) * std::pow(0.5 * (1.0 + std::exp(zeta)), 10);
    note(mgf, exp_moment_bound(zeta, 5.0, 5.0));
  }
  r.values = {{"tail_max_excess", tail_worst}, {"mgf_max_excess", worst}, {"circ64_delta", m.delta}};
  r.pass = tail_worst <= 0.0 && worst <= 1e-15;
  return r;
}

CriterionResult Battery::c13() const {
  auto r = start(13, "wills functional");
  const auto cone = Cone::orthant(8);
  const double poly = wills_functional(exact_profile(cone), 0.5);
  const auto cfg = config(13, 0, 1000000);
  const auto mc = wills_mc(cone, 0.5, cfg, WillsEstimator::Conditional);
  const auto direct = wills_mc(cone, 0.5, cfg, WillsEstimator::Direct);
  r.values = {{"polynomial", poly},          {"mc", mc.mean},          {"mc_se", mc.std_error},
              {"direct_mc", direct.mean}, {"direct_mc_se", direct.std_error}};
  r.pass = std::abs(poly - 0.1001129150390625) <= 1e-15 && std::abs(mc.mean - poly) <= 0.005;
  return r;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  Battery b(options);
  using Fn = CriterionResult (Battery::*)() const;
  const Fn fns[] = {&Battery::c1, &Battery::c2,  &Battery::c3,  &Battery::c4,  &Battery::c5,
                    &Battery::c6, &Battery::c7,  &Battery::c8,  &Battery::c9,  &Battery::c10,
                    &Battery::c11, &Battery::c12, &Battery::c13};
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 13; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = (b.*fns[id - 1])();
    } catch (const std::exception& e) {
      res.id = id;
      res.title = "criterion " + std::to_string(id);
      res.pass = false;
      res.note = std::string("error: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.on_result) options.on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

CriterionResult determinism_result(const std::string& first, const std::string& second, int first_workers,
                                   int second_workers) {
  auto r = start(14, "determinism");
  r.pass = first == second;
  r.values = {{"workers_a", static_cast<double>(first_workers)},
              {"workers_b", static_cast<double>(second_workers)},
              {"bytes", static_cast<double>(first.size())}};
  if (!r.pass) r.note = "report text differs between runs";
  return r;
}

std::string format_result(const CriterionResult& r) {
  std::string line = "criterion " + std::to_string(r.id) + " [" + r.title + "]: " + (r.pass ? "PASS" : "FAIL");
  for (const auto& [name, value] : r.values) line += " " + name + "=" + format_number(value);
  if (!r.note.empty()) line += " (" + r.note + ")";
  return line + "\n";
}

std::string format_results(const std::vector<CriterionResult>& results) {
  std::string text;
  for (const auto& r : results) text += format_result(r);
  return text;
}

Report run_report(const AcceptanceOptions& options) {
  AcceptanceOptions single = options;
  single.workers = 1;
  AcceptanceOptions multi = options;
  multi.workers = std::max(options.workers, 4);
  multi.on_result = nullptr;

  Report rep;
  rep.results = run_acceptance(single);
  const std::string first = format_results(rep.results);
  const std::string second = format_results(run_acceptance(multi));
  auto det = determinism_result(first, second, single.workers, multi.workers);
  if (options.on_result) options.on_result(det);
  rep.results.push_back(det);
  rep.text = first + format_result(det);
  rep.all_pass = std::all_of(rep.results.begin(), rep.results.end(), [](const auto& r) { return r.pass; });
  return rep;
}

}  // namespace conevol
