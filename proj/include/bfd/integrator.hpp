#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bfd/collision.hpp"
#include "bfd/functionals.hpp"

namespace bfd {

struct StepControl {
  /// Step size; 0 selects 0.1 * safety / max loss rate on the first step.
  double dt = 0.0;
  double dt_min = 1e-10;
  double dt_max = 1.0;
  double safety = 1.0;
  double tol_bound = 1e-12;
  int max_halvings = 30;

  void validate() const;
};

/// Heuristic 0.1 * safety / max_i loss_rate_i, clipped to [dt_min, dt_max].
double initial_time_step(const DistributionState& f, const CollisionKernelSpec& spec,
                         const SphereQuadrature& sphere, const StepControl& ctl);

struct StepOutcome {
  DistributionState state;
  double dt = 0.0;
  int halvings = 0;
  /// D^{(gamma)} of the state the step started from.
  double entropy_production = 0.0;
};

/// One SSP-RK2 step with the occupancy-weighted conservative correction.
/// ctl.dt must be positive.
StepOutcome step_detailed(const DistributionState& f, const CollisionKernelSpec& spec,
                          const SphereQuadrature& sphere, const StepControl& ctl);

DistributionState step(const DistributionState& f, const CollisionKernelSpec& spec,
                       const SphereQuadrature& sphere, const StepControl& ctl);

struct IntegrateOptions {
  double t_end = 0.0;
  double output_interval = 0.0;
  StepControl control;
  std::vector<double> s_values{4.0};
  std::vector<double> eta_values;
  /// Reference equilibrium for H_rel; unset selects the discrete Fermi-Dirac
  /// state with the moments of f0.
  std::optional<DistributionState> reference;
  bool keep_snapshots = false;
};

struct Record {
  double t = 0.0;
  double mass = 0.0;
  Vec3 momentum = Vec3::Zero();
  double energy = 0.0;
  std::vector<double> m_s;
  std::vector<double> m_s_gamma;
  double M0 = 0.0;
  double S = 0.0;
  double H = 0.0;
  double H_rel = 0.0;
  double D_gamma = 0.0;
  std::vector<double> D_eta;
  double max_f = 0.0;
  double kappa0 = 1.0;
  double dt = 0.0;
  double ck_lhs = 0.0;
  double ck_mid = 0.0;
  double l1_dist = 0.0;
};

struct StepLog {
  double t = 0.0;
  double S = 0.0;
  double D = 0.0;
  double dt = 0.0;
};

struct TimeSeries {
  double epsilon = 0.0;
  double gamma = 0.0;
  std::vector<double> s_values;
  std::vector<double> eta_values;
  std::vector<Record> records;
  /// One entry per accepted step plus the final state.
  std::vector<StepLog> steps;
  std::vector<Snapshot> snapshots;
  /// Output indices where H_rel increased (recorded, not repaired).
  std::vector<std::size_t> h_rel_violations;
  std::optional<DistributionState> final_state;
};

TimeSeries integrate(const DistributionState& f0, const CollisionKernelSpec& spec,
                     const SphereQuadrature& sphere, const IntegrateOptions& options);

/// Sub-sampled trajectory on [0, delta]: values[m] at t = m delta / (size - 1).
struct Trajectory {
  double delta = 0.0;
  std::vector<Field> values;
};

/// J(f)(t_m) = f_in + int_0^{t_m} Q(|f| ^ 1/eps) by the trapezoid rule.
Trajectory picard_apply(const Trajectory& f, const DistributionState& f_in,
                        const CollisionKernelSpec& spec, const SphereQuadrature& sphere);

struct PicardResult {
  Trajectory trajectory;
  /// r_k = sup_t ||f^{(k+1)}(t) - f^{(k)}(t)||_{L^1_2}
  std::vector<double> differences;
  std::vector<double> ratios;
  bool converged = false;
};

PicardResult picard_solve(const DistributionState& f_in, double delta, int iterations,
                          const CollisionKernelSpec& spec, const SphereQuadrature& sphere,
                          int sub_samples = 8, double tolerance = 1e-13);

/// Binary checkpoint: "BFDCKPT1", u32 version, f64 L, u32 N, f64 eps, f64 t,
/// then N^3 f64 values, little endian.
void write_checkpoint(const std::string& path, const DistributionState& f);
DistributionState read_checkpoint(const std::string& path);

}  // namespace bfd
