#include "conevol/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "conevol/acceptance.hpp"
#include "conevol/bounds.hpp"
#include "conevol/cone_spec.hpp"
#include "conevol/error.hpp"
#include "conevol/profiles.hpp"
#include "conevol/steiner.hpp"

namespace conevol {

namespace {

using json = nlohmann::json;

/// A flag value the parser accepted but the command cannot use.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Common {
  std::uint64_t seed = 1;
  std::uint64_t samples = 100000;
  std::uint64_t chunk = std::uint64_t{1} << 14;
  int workers = -1;
  std::string output;

  int resolved_workers() const {
    if (workers >= 0) return workers;
    const char* env = std::getenv("CONEVOL_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 0 || n > 4096) throw UsageError("CONEVOL_THREADS must be a nonnegative integer");
    return static_cast<int>(n);
  }

  MonteCarloConfig config() const {
    if (samples == 0) throw UsageError("--samples must be at least 1 for this command");
    MonteCarloConfig c;
    c.seed = seed;
    c.total_samples = samples;
    c.chunk_size = chunk;
    c.workers = resolved_workers();
    return c;
  }
};

void add_common(CLI::App* cmd, Common& c, bool sampling = true) {
  if (sampling) {
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--samples", c.samples, "Monte Carlo sample count")->capture_default_str();
    cmd->add_option("--chunk", c.chunk, "Samples per chunk (part of the seed contract)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--workers", c.workers, "Worker threads (default: CONEVOL_THREADS, else all cores)")
        ->check(CLI::NonNegativeNumber);
  }
  cmd->add_option("--output", c.output, "Write the artifact to this file instead of stdout");
}

std::vector<double> se_or_zero(const IntrinsicVolumeProfile& p) {
  return p.stderr_v ? *p.stderr_v : std::vector<double>(p.v.size(), 0.0);
}

std::optional<IntrinsicVolumeProfile> try_exact(const Cone& cone) {
  try {
    return exact_profile(cone);
  } catch (const UnsupportedVariant&) {
    return std::nullopt;
  }
}

// Exact when available, then faces for polyhedral cones, the biorthogonal
// system up to d = 12 and mixture inversion beyond.
IntrinsicVolumeProfile profile_by_method(const Cone& cone, const std::string& method, const Common& common) {
  if (method == "exact") return exact_profile(cone);
  if (method == "face") return estimate_profile_face(cone, common.config());
  if (method == "biorth") return estimate_profile_biorthogonal(cone, common.config());
  if (method == "mixture") return estimate_profile_mixture(cone, common.config());
  if (auto p = try_exact(cone)) return *p;
  if (cone.is_polyhedral()) return estimate_profile_face(cone, common.config());
  if (cone.ambient_dim() <= 12) return estimate_profile_biorthogonal(cone, common.config());
  return estimate_profile_mixture(cone, common.config());
}

json profile_json(const IntrinsicVolumeProfile& p) {
  json j;
  j["d"] = p.d;
  j["provenance"] = to_string(p.provenance);
  j["v"] = p.v;
  j["stderr"] = p.stderr_v ? json(*p.stderr_v) : json(nullptr);
  j["raw"] = p.raw ? json(*p.raw) : json(nullptr);
  j["mean"] = p.mean();
  j["variance"] = p.variance();
  return j;
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"std_error", e.std_error}}; }

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !std::isfinite(x)) throw UsageError("--lambda-grid expects a:b:step");
    parts.push_back(x);
  }
  if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0])
    throw UsageError("--lambda-grid expects a:b:step with a <= b and step > 0");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  if (n > 1000000) throw UsageError("--lambda-grid has too many points");
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  return grid;
}

struct Cli {
  CLI::App app{"conevol: conic intrinsic volumes, Steiner formulas and concentration bounds", "conevol"};
  std::string command;
  Common common;

  // Shared by several subcommands.
  std::string cone;
  std::vector<std::string> cones;
  std::string method = "auto";
  std::string format;
  std::string check;
  std::string estimator = "conditional";
  std::string grid;
  std::vector<double> lambdas;
  double lambda = 0.5;
  std::optional<double> delta;
  std::optional<double> delta_polar;

  Cli() {
    app.require_subcommand(1);
    app.fallthrough(false);
    const std::vector<std::string> methods = {"auto", "exact", "face", "biorth", "mixture"};

    auto* profile = app.add_subcommand("profile", "Intrinsic-volume profile of a cone");
    profile->add_option("--cone", cone, "Cone spec, e.g. prod(circ:8:pi/6,psd:3)")->required();
    profile->add_option("--method", method, "Estimator; auto picks exact, face, biorth, mixture in that order")
        ->check(CLI::IsMember(methods))
        ->capture_default_str();
    profile->add_option("--out", format, "Artifact format")->check(CLI::IsMember({"json", "csv"}));
    add_common(profile, common);
    profile->footer("CSV columns: k,v,stderr,raw");

    auto* sdim = app.add_subcommand("sdim", "Statistical dimension of a cone and of its polar (JSON)");
    sdim->add_option("--cone", cone, "Cone spec")->required();
    add_common(sdim, common);

    auto* var = app.add_subcommand("var", "Variance of the intrinsic-volume law (JSON)");
    var->add_option("--cone", cone, "Cone spec")->required();
    add_common(var, common);

    auto* tail = app.add_subcommand("tail", "Concentration bounds over a grid of deviations");
    tail->add_option("--cone", cone, "Cone spec (used for Monte Carlo delta estimates)");
    tail->add_option("--lambda-grid", grid, "Deviation grid a:b:step (inclusive)")->required();
    tail->add_option("--delta", delta, "Statistical dimension of the cone");
    tail->add_option("--delta-polar", delta_polar, "Statistical dimension of the polar cone");
    tail->add_option("--out", format, "Artifact format")->check(CLI::IsMember({"json", "csv"}));
    add_common(tail, common);
    tail->footer("CSV columns: lambda,upper,lower,combined,variance_bound,chebyshev,delta,delta_polar");

    auto* steiner = app.add_subcommand("steiner", "Steiner identity: mixture side against direct Monte Carlo");
    steiner->add_option("--cone", cone, "Cone spec")->required();
    steiner->add_option("--check", check, "Identity to check")
        ->check(CLI::IsMember({"gaussian", "spherical", "master"}))
        ->required();
    steiner->add_option("--lambda", lambdas, "Lambda values (defaults depend on the check)");
    steiner->add_option("--method", method, "Profile estimator for the mixture side")
        ->check(CLI::IsMember(methods))
        ->capture_default_str();
    add_common(steiner, common);
    steiner->footer(
        "CSV columns: label,lambda,mixture,mc,diff,std_error,ok\n"
        "Exits 4 when any row has |diff| > 4 SE + 0.01.");

    auto* wills = app.add_subcommand("wills", "Wills functional: polynomial and Monte Carlo values (JSON)");
    wills->add_option("--cone", cone, "Cone spec")->required();
    wills->add_option("--lambda", lambda, "Evaluation point, lambda > 0")->capture_default_str();
    wills->add_option("--estimator", estimator, "Monte Carlo form")
        ->check(CLI::IsMember({"conditional", "direct"}))
        ->capture_default_str();
    wills->add_option("--method", method, "Profile estimator for the polynomial")
        ->check(CLI::IsMember(methods))
        ->capture_default_str();
    add_common(wills, common);

    auto* product = app.add_subcommand("product-check", "Convolution of two profiles against the product cone");
    product->add_option("--cone", cones, "Cone spec; give exactly two")
        ->required()
        ->type_size(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    product->add_option("--method", method, "Profile estimator for all three cones")
        ->check(CLI::IsMember(methods))
        ->capture_default_str();
    add_common(product, common);
    product->footer(
        "CSV columns: k,convolution,convolution_se,direct,direct_se,diff,joint_se,ok\n"
        "Exits 4 when any |diff| > 4 joint SE.");

    auto* report = app.add_subcommand("report", "Full regression battery, one line per criterion");
    report->add_option("--seed", common.seed, "Base seed of the battery")->capture_default_str();
    report->add_option("--chunk", common.chunk, "Samples per chunk")->capture_default_str()->check(CLI::PositiveNumber);
    report->add_option("--workers", common.workers, "Worker threads of the second run (at least 4 are used)")
        ->check(CLI::NonNegativeNumber);
    add_common(report, common, false);
    report->footer("Runtimes go to stderr; exits 4 when any criterion fails.");
  }

  std::string run_profile() {
    const Cone c = parse_cone_spec(cone);
    const auto p = profile_by_method(c, method, common);
    if (format == "csv") {
      std::string text = "k,v,stderr,raw\n";
      const auto se = se_or_zero(p);
      for (std::size_t k = 0; k <= p.d; ++k)
        text += std::to_string(k) + "," + num(p.v[k]) + "," + num(se[k]) + "," + num(p.raw ? (*p.raw)[k] : p.v[k]) +
                "\n";
      return text;
    }
    json j = profile_json(p);
    j["cone"] = print_or_echo(c);
    j["method"] = method;
    if (p.provenance != Provenance::Exact) {
      j["samples"] = common.samples;
      j["seed"] = common.seed;
    }
    return j.dump(2) + "\n";
  }

  std::string print_or_echo(const Cone& c) const {
    try {
      return print_cone_spec(c);
    } catch (const UnsupportedVariant&) {
      return cone;
    }
  }

  std::string run_sdim() {
    const Cone c = parse_cone_spec(cone);
    SummaryOptions opt;
    opt.face_histogram = false;
    const auto summary = run_summary(c, common.config(), opt);
    const auto delta = statistical_dimension(summary);
    json j;
    j["cone"] = print_or_echo(c);
    j["d"] = c.ambient_dim();
    j["samples"] = common.samples;
    j["seed"] = common.seed;
    j["delta"] = estimate_json(delta);
    j["delta_polar"] = estimate_json({summary.t.mean, summary.t.standard_error()});
    return j.dump(2) + "\n";
  }

  std::string run_var() {
    const Cone c = parse_cone_spec(cone);
    SummaryOptions opt;
    opt.face_histogram = false;
    const auto summary = run_summary(c, common.config(), opt);
    const auto v = intrinsic_variance(summary);
    json j;
    j["cone"] = print_or_echo(c);
    j["d"] = c.ambient_dim();
    j["samples"] = common.samples;
    j["seed"] = common.seed;
    j["delta"] = estimate_json(statistical_dimension(summary));
    j["variance"] = estimate_json(v.combined);
    j["variance_primal"] = estimate_json(v.primal);
    j["variance_polar"] = estimate_json(v.polar);
    return j.dump(2) + "\n";
  }

  std::string run_tail() {
    const auto lambdas_grid = parse_grid(grid);
    double d = 0.0, dp = 0.0;
    if (delta && delta_polar) {
      d = *delta;
      dp = *delta_polar;
    } else {
      if (cone.empty()) throw UsageError("tail needs --cone or both --delta and --delta-polar");
      const Cone c = parse_cone_spec(cone);
      SummaryOptions opt;
      opt.face_histogram = false;
      const auto summary = run_summary(c, common.config(), opt);
      d = delta.value_or(summary.s.mean);
      dp = delta_polar.value_or(summary.t.mean);
    }
    std::vector<TailBoundReport> rows;
    for (double l : lambdas_grid) rows.push_back(tail_bound_report(l, d, dp));
    if (format == "json") {
      json arr = json::array();
      for (const auto& r : rows)
        arr.push_back({{"lambda", r.lambda},
                       {"upper", r.upper},
                       {"lower", r.lower},
                       {"combined", r.combined},
                       {"variance_bound", r.variance_bound},
                       {"chebyshev", std::isfinite(r.chebyshev) ? json(r.chebyshev) : json("inf")},
                       {"delta", r.delta},
                       {"delta_polar", r.delta_polar}});
      return arr.dump(2) + "\n";
    }
    std::string text = "lambda,upper,lower,combined,variance_bound,chebyshev,delta,delta_polar\n";
    for (const auto& r : rows)
      text += num(r.lambda) + "," + num(r.upper) + "," + num(r.lower) + "," + num(r.combined) + "," +
              num(r.variance_bound) + "," + num(r.chebyshev) + "," + num(r.delta) + "," + num(r.delta_polar) + "\n";
    return text;
  }

  std::string run_steiner(bool& failed) {
    const Cone c = parse_cone_spec(cone);
    const auto p = profile_by_method(c, method, common);
    SteinerCheck kind = SteinerCheck::Master;
    std::vector<double> ls = lambdas;
    if (check == "gaussian") {
      kind = SteinerCheck::Gaussian;
      if (ls.empty()) ls = {0.5, 1.0, 2.0, 4.0, 8.0};
    } else if (check == "spherical") {
      kind = SteinerCheck::Spherical;
      if (ls.empty()) ls = {0.1, 0.25, 0.5, 0.75, 0.9};
      for (double l : ls)
        if (l < 0.0 || l > 1.0) throw UsageError("spherical lambda must lie in [0, 1]");
    }
    MonteCarloConfig mc = common.config();
    mc.seed = common.seed ^ 0x5DEECE66Dull;  // independent of the profile's stream
    const auto rows = steiner_check(kind, c, p, ls, mc);
    std::string text = "label,lambda,mixture,mc,diff,std_error,ok\n";
    for (const auto& r : rows) {
      text += r.label + "," + num(r.lambda) + "," + num(r.mixture) + "," + num(r.mc) + "," + num(r.diff) + "," +
              num(r.std_error) + "," + (r.ok ? "1" : "0") + "\n";
      failed = failed || !r.ok;
    }
    return text;
  }

  std::string run_wills() {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw UsageError("--lambda must be positive");
    const Cone c = parse_cone_spec(cone);
    const auto p = profile_by_method(c, method, common);
    MonteCarloConfig mc = common.config();
    mc.seed = common.seed ^ 0x5DEECE66Dull;
    const auto est = wills_mc(c, lambda, mc, estimator == "direct" ? WillsEstimator::Direct : WillsEstimator::Conditional);
    json j;
    j["cone"] = print_or_echo(c);
    j["lambda"] = lambda;
    j["profile_provenance"] = to_string(p.provenance);
    j["polynomial"] = wills_functional(p, lambda);
    j["estimator"] = estimator;
    j["mc"] = {{"value", est.mean}, {"std_error", est.std_error}};
    j["samples"] = common.samples;
    j["seed"] = common.seed;
    return j.dump(2) + "\n";
  }

  std::string run_product(bool& failed) {
    if (cones.size() != 2) throw UsageError("product-check needs exactly two --cone flags");
    const Cone a = parse_cone_spec(cones[0]);
    const Cone b = parse_cone_spec(cones[1]);
    Common ca = common, cb = common, cw = common;
    ca.seed = common.seed;
    cb.seed = common.seed + 0x9E3779B97F4A7C15ull;
    cw.seed = common.seed + 2 * 0x9E3779B97F4A7C15ull;
    const auto conv = convolve(profile_by_method(a, method, ca), profile_by_method(b, method, cb));
    const auto direct = profile_by_method(Cone::product(a, b), method, cw);
    const auto sc = se_or_zero(conv);
    const auto sd = se_or_zero(direct);
    std::string text = "k,convolution,convolution_se,direct,direct_se,diff,joint_se,ok\n";
    for (std::size_t k = 0; k <= conv.d; ++k) {
      const double diff = std::abs(conv.v[k] - direct.v[k]);
      const double se = std::hypot(sc[k], sd[k]);
      const bool ok = diff <= 1e-12 || diff <= 4.0 * se;
      failed = failed || !ok;
      text += std::to_string(k) + "," + num(conv.v[k]) + "," + num(sc[k]) + "," + num(direct.v[k]) + "," + num(sd[k]) +
              "," + num(diff) + "," + num(se) + "," + (ok ? "1" : "0") + "\n";
    }
    return text;
  }

  std::string run_report(std::ostream& err, bool& failed) {
    AcceptanceOptions opt;
    opt.seed = common.seed;
    opt.chunk_size = common.chunk;
    opt.workers = common.resolved_workers();
    opt.on_result = [&err](const CriterionResult& r) {
      err << "criterion " << r.id << ": " << num(r.seconds) << " s";
      if (r.runtime_limit > 0.0) err << " (limit " << num(r.runtime_limit) << " s)";
      err << "\n";
    };
    const auto rep = conevol::run_report(opt);
    failed = !rep.all_pass;
    return rep.text;
  }

  std::string dispatch(std::ostream& err, bool& failed) {
    if (command == "profile") return run_profile();
    if (command == "sdim") return run_sdim();
    if (command == "var") return run_var();
    if (command == "tail") return run_tail();
    if (command == "steiner") return run_steiner(failed);
    if (command == "wills") return run_wills();
    if (command == "product-check") return run_product(failed);
    return run_report(err, failed);
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    cli.app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return cli.app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    cli.app.exit(e, out, err);
    return kExitUsage;
  }
  for (const auto* sub : cli.app.get_subcommands()) cli.command = sub->get_name();
  if (cli.format.empty()) cli.format = cli.command == "tail" ? "csv" : "json";

  bool failed = false;
  std::string artifact;
  try {
    artifact = cli.dispatch(err, failed);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }

  if (cli.common.output.empty()) {
    out << artifact;
  } else {
    std::ofstream file(cli.common.output, std::ios::binary);
    file << artifact;
    if (!file) {
      err << "error: cannot write " << cli.common.output << "\n";
      return kExitUsage;
    }
  }
  return failed ? kExitCheck : kExitOk;
}

}  // namespace conevol
