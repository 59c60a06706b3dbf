#pragma once

#include <vector>

#include "bfd/integrator.hpp"
#include "bfd/kernel.hpp"

namespace bfd {

struct ExponentReport {
  double value = 0.0;
  /// False when the formula is evaluated outside its hypothesis.
  bool hypothesis_ok = true;
};

/// (s - 18 - 5|gamma|) / (4 + 2|gamma|); hypothesis s > 22 + 5|gamma|.
ExponentReport expected_decay_exponent(double s, double gamma);

/// -3 / (2 nu)
double moment_envelope_exponent(double nu);

/// t -> C_s (t + t^{-3/(2 nu)}).
struct MomentEnvelope {
  double C_s = 1.0;
  double nu = 0.75;

  double operator()(double t) const;
  /// Minimizer (3 / (2 nu))^{2 nu / (2 nu + 3)}.
  double t_min() const;
};

/// Requires s >= 8 + |gamma|.
MomentEnvelope moment_growth_envelope(double s, double nu, double gamma, double C_s);

/// 3|gamma| / (4 nu s + 3 gamma)
double linf_mass_exponent(double s, double nu, double gamma);

/// C (1 + t_*^{-3s/(4 nu s + 3 gamma) - 3/(4 nu)}) (sup m_s)^{3|gamma|/(4 nu s + 3 gamma)}.
/// Throws unless s > 3|gamma| / (2 nu).
double linf_envelope(double s, double nu, double gamma, double t_star, double sup_m_s,
                     double C = 1.0);

/// c'_s = 2 pi 2^{-4-s/2} int_0^{pi/2} b(cos theta) sin^3 theta d theta.
double moment_production_constant(const CollisionKernelSpec& spec, double s);

struct MomentMonitorInput {
  double s = 4.0;
  double f_in_l1 = 0.0;
  double f_in_l1_2 = 0.0;
  /// c'_1; a non-positive value selects
  /// 2^{-9/2} 2 pi b0 (2/3) ||f_in||_{L^1} / ||f_in||_{L^1_2}.
  double c1_prime = 0.0;
};

struct MomentMonitorReport {
  double c_s = 0.0;
  double C_s = 0.0;
  double c1 = 0.0;
  std::vector<double> margins;
  double min_margin = 0.0;
};

/// margin(t) = [m_s(0) + C_s t] - [m_s(t) + (c_s / 2) int_0^t m_{s+gamma}]
/// on the recorded outputs (trapezoid rule in time).
MomentMonitorReport moment_inequality_monitor(const std::vector<double>& times,
                                              const std::vector<double>& m_s,
                                              const std::vector<double>& m_s_gamma,
                                              const CollisionKernelSpec& spec,
                                              const MomentMonitorInput& input);

struct DecayFit {
  double amplitude = 0.0;
  double exponent = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  /// RMS residual of log y against the fitted line.
  double residual = 0.0;
  std::size_t samples = 0;
  double paper_exponent = 0.0;
  bool paper_hypothesis_ok = false;
};

/// Least-squares fit of log y = log A - p log(1 + t) on t in [t_a, t_b].
DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& values, double t_a,
                   double t_b, double s = 30.0, double gamma = -0.5);

/// Share of the discrete mass carried by the outermost layer of nodes; a
/// large value means the box truncates the distribution.
double boundary_mass_fraction(const Field& f, const VelocityGrid& grid);

/// 1 - eps sup_{t >= t_min} max f(t).
double nonsaturation_kappa(const std::vector<double>& times, const std::vector<double>& max_f,
                           double eps, double t_min);

struct SweepMember {
  double epsilon = 0.0;
  TimeSeries series;
};

struct SweepRow {
  double epsilon = 0.0;
  double kappa0 = 1.0;
  DecayFit fit;
  double final_h_rel = 0.0;
  double max_linf = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// sup over members and outputs of max f(t).
  double uniform_linf_bound = 0.0;
  /// False when some member's max f keeps climbing: the rise of its sup over
  /// the second half of the horizon exceeds both half the rise over the first
  /// half and 1% of the first-half sup.
  bool no_monotone_growth = true;
  bool pauli_respected = true;
};

SweepReport compare_sweep(const std::vector<SweepMember>& members, double fit_t_a, double fit_t_b,
                          double tol_bound = 1e-12);

}  // namespace bfd
