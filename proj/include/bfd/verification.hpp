#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bfd {

struct VerifyOptions {
  /// eps = 0 profile: runs the classical subset only.
  bool classical = false;
  /// Criterion ids to run; empty runs all.
  std::vector<int> criteria;
  bool inject_projection_fault = false;
  std::uint64_t seed = 20240607;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool skipped = false;
  /// Names of the sub-checks that failed.
  std::vector<std::string> failed_checks;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the acceptance checks in order; `on_result` (if set) sees each
/// result as soon as it is available.
std::vector<CriterionResult> run_verification(
    const VerifyOptions& options,
    const std::function<void(const CriterionResult&)>& on_result = {});

/// One line: "PASS  3  equilibrium annihilation  (12.3 s)  detail".
std::string format_result(const CriterionResult& result);

}  // namespace bfd
