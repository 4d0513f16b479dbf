// Regression battery: one pass/fail line per criterion. Runtime targets are
// enforced here, not in the deterministic report text.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "conevol/acceptance.hpp"

int main(int argc, char** argv) {
  conevol::AcceptanceOptions opt;
  opt.seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  if (const char* env = std::getenv("CONEVOL_THREADS")) opt.workers = std::atoi(env);

  bool all_pass = true;
  opt.on_result = [&all_pass](const conevol::CriterionResult& r) {
    conevol::CriterionResult shown = r;
    if (r.runtime_limit > 0.0 && r.seconds > r.runtime_limit) {
      shown.pass = false;
      shown.note += (shown.note.empty() ? "" : "; ") + std::string("runtime limit exceeded");
    }
    all_pass = all_pass && shown.pass;
    std::string line = conevol::format_result(shown);
    line.pop_back();
    char timing[96];
    if (r.runtime_limit > 0.0)
      std::snprintf(timing, sizeof timing, " [%.2f s, limit %.0f s]", r.seconds, r.runtime_limit);
    else
      std::snprintf(timing, sizeof timing, " [%.2f s]", r.seconds);
    std::cout << line << timing << std::endl;
  };
  const auto report = conevol::run_report(opt);
  all_pass = all_pass && report.all_pass;
  std::cout << (all_pass ? "acceptance: all criteria pass" : "acceptance: some criteria fail") << std::endl;
  return all_pass ? 0 : 1;
}
