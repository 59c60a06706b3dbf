#pragma once

#include <string>
#include <vector>

#include "bfd/config.hpp"
#include "bfd/diagnostics.hpp"

namespace bfd {

/// Post-run checks of one trajectory.
struct RunChecks {
  double entropy_change = 0.0;
  double entropy_production_integral = 0.0;
  /// |dS - int D| / |dS|
  double entropy_identity_residual = 0.0;
  /// Worst (S_{k+1} - S_k) / |S_k| over accepted steps.
  double min_entropy_step = 0.0;
  /// Worst D_gamma / max(1, max |D_gamma|) over outputs.
  double min_scaled_production = 0.0;
  /// Worst (mid - lhs) / max(1, mid) over outputs.
  double min_ck_margin = 0.0;
  bool h_rel_strictly_decreasing = true;
  /// Worst relative drift of mass, momentum and energy.
  double conservation_drift = 0.0;
  double max_pauli_excess = 0.0;
  std::vector<std::string> violations;
};

/// `h` is the grid spacing, used by the entropy-identity tolerance
/// max(1e-3 |dS|, 10 h^2 + 10 dt^2).
RunChecks check_trajectory(const TimeSeries& ts, double h);

struct RunOutcome {
  TimeSeries series;
  RunChecks checks;
  double epsilon = 0.0;
  std::string summary_json;
};

/// Runs the configured simulation; writes timeseries.csv, its schema,
/// summary.json, the normalized config and a final checkpoint into `out_dir`
/// unless it is empty.
RunOutcome run(const RunConfig& config, const std::string& out_dir);

/// Same, starting from `f0` instead of the configured datum.
RunOutcome run(const RunConfig& config, const DistributionState& f0, const std::string& out_dir);

struct SweepOutcome {
  std::vector<RunOutcome> members;
  SweepReport report;
  std::string summary_json;
};

/// One run per eps fraction (sequential, each in out_dir/eps_<k>), all from
/// the datum sampled at the largest eps of the list.
SweepOutcome sweep(const RunConfig& config, const std::vector<double>& fractions,
                   const std::string& out_dir);

/// 0 selects the OpenMP default.
void set_thread_count(int threads);

}  // namespace bfd
