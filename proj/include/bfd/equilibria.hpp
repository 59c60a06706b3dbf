#pragma once

#include "bfd/state.hpp"

namespace bfd {

/// Fermi-Dirac statistics a e^{-b|v-u|^2} / (1 + eps a e^{-b|v-u|^2}) with
/// mass rho, bulk velocity u and temperature theta.
struct FermiDiracParams {
  double rho = 1.0;
  Vec3 u = Vec3::Zero();
  double theta = 1.0;
  double epsilon = 0.0;
  double a = 0.0;
  double b = 0.0;
  /// Relative residuals of the mass and energy constraints after the solve.
  double mass_residual = 0.0;
  double energy_residual = 0.0;
  int iterations = 0;

  /// Peak value a / (1 + eps a), reached at v = u.
  double max_density() const { return a / (1.0 + epsilon * a); }
};

struct FdMoments {
  double mass = 0.0;
  /// int |v|^2 F dv about the bulk velocity (3 rho theta at a solution).
  double energy = 0.0;
};

FdMoments fd_moments(double a, double b, double eps);

/// 4 pi (5 theta)^{3/2} / (3 rho).
double epsilon_sat(double rho, double theta);

/// Damped Newton on (log a, log b). Throws when eps is not below
/// epsilon_sat(rho, theta) by a relative margin of 1e-6.
FermiDiracParams solve_fd_params(double rho, const Vec3& u, double theta, double eps);

DistributionState sample_equilibrium(const FermiDiracParams& params, const VelocityGrid& grid);

struct SaturatedState {
  DistributionState state;
  double radius = 0.0;
  /// Discrete mass minus rho.
  double mass_defect = 0.0;
};

/// 1/eps on the ball |v - u| <= (3 rho eps / 4 pi)^{1/3}, zero elsewhere.
SaturatedState saturated_state(double rho, const Vec3& u, double eps, const VelocityGrid& grid);

/// Discrete mass, momentum and energy of a grid sample.
struct GridMoments {
  double mass = 0.0;
  Vec3 momentum = Vec3::Zero();
  double energy = 0.0;
};

GridMoments grid_moments(const Field& f, const VelocityGrid& grid);

/// Temperature implied by moments: (energy - |momentum|^2 / mass) / (3 mass).
double temperature(const GridMoments& m);

/// Grid sample of Fermi-Dirac form whose discrete mass, momentum and energy
/// equal `target` to round-off. Solved by Newton on the log-odds coefficients,
/// starting from the continuum fit; this is the discrete entropy maximizer
/// under those constraints.
DistributionState discrete_equilibrium(const GridMoments& target, double eps,
                                       const VelocityGrid& grid);

}  // namespace bfd
