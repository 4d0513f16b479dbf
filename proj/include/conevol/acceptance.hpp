#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace conevol {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  /// Named measurements, printed in order.
  std::vector<std::pair<std::string, double>> values;
  std::string note;
  /// Wall time; never part of the deterministic report text.
  double seconds = 0.0;
  /// Runtime target in seconds, 0 when the criterion states none.
  double runtime_limit = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  std::uint64_t chunk_size = std::uint64_t{1} << 14;
  int workers = 0;
  /// Criteria to run (1..13); empty runs all of them.
  std::vector<int> only;
  /// Called after each criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
};

/// Runs criteria 1..13 of the regression battery.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// Criterion 14 from two report texts that must be byte-identical.
CriterionResult determinism_result(const std::string& first, const std::string& second, int first_workers,
                                   int second_workers);

/// One deterministic line per criterion (17 significant digits, no timings).
std::string format_result(const CriterionResult& result);
std::string format_results(const std::vector<CriterionResult>& results);

/// The `report` artifact: the battery at 1 worker and at `workers` (at least
/// 4), followed by the determinism line comparing the two.
struct Report {
  std::string text;
  std::vector<CriterionResult> results;  // 1..14
  bool all_pass = false;
};

Report run_report(const AcceptanceOptions& options);

}  // namespace conevol
