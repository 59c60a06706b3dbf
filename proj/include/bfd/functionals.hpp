#pragma once

#include <vector>

#include "bfd/equilibria.hpp"
#include "bfd/kernel.hpp"
#include "bfd/sphere.hpp"
#include "bfd/state.hpp"

namespace bfd {

/// <v> = sqrt(1 + |v|^2).
inline double japanese_bracket(const Vec3& v) { return std::sqrt(1.0 + v.squaredNorm()); }

struct MomentReport {
  double s = 0.0;
  /// int f <v>^s
  double m = 0.0;
  /// int f^2 <v>^s
  double M = 0.0;
  /// m + M / 2
  double E = 0.0;
};

MomentReport moment(const Field& f, const VelocityGrid& grid, double s);

/// Fermi-Dirac entropy eps^{-1} int [-(1 - eps f) log(1 - eps f) - eps f log(eps f)].
/// At eps = 0 it is -H(f), the classical limit up to an additive constant.
double entropy_S(const DistributionState& f);

/// int f log f.
double boltzmann_entropy(const Field& f, const VelocityGrid& grid);

/// S(g) - S(f).
double relative_entropy(const DistributionState& f, const DistributionState& g);

/// x / (1 - eps x).
inline double psi_eps(double x, double eps) { return x / (1.0 - eps * x); }

/// D^{(eta)}: 1/4 int int int |v - v_*|^eta b (Pi+ - Pi-) log(Pi+ / Pi-) on
/// the collision quadrature; eta = gamma gives the physical dissipation.
double entropy_production(const DistributionState& f, const CollisionKernelSpec& spec,
                          const SphereQuadrature& sphere, double eta);

struct CsiszarKullback {
  /// ||f - M||_{L^1}^2
  double lhs = 0.0;
  /// 2 (int f) H(f | M)
  double mid = 0.0;
  /// ||f - M||_{L^1_2}
  double rhs = 0.0;
};

/// Both sides of the lower Csiszar-Kullback bound plus the L^1_2 distance.
/// Throws when the mass or energy of f and the reference differ by more than
/// `moment_tolerance` (relative).
CsiszarKullback csiszar_kullback_gap(const DistributionState& f, const DistributionState& reference,
                                     double moment_tolerance = 1e-3);
CsiszarKullback csiszar_kullback_gap(const DistributionState& f, const FermiDiracParams& params,
                                     double moment_tolerance = 1e-3);

/// max(f - K, 0) per node.
Field level_set_positive(const Field& f, double K);

/// Squared homogeneous Sobolev seminorm sum |G_k|^2 |xi_k|^{2 nu} (h^3 / N^3) of
/// the box-periodized sample, with 0^0 = 1 so nu = 0 returns ||g||_{L^2}^2.
double sobolev_seminorm_sq(const Field& g, const VelocityGrid& grid, double nu);

struct Snapshot {
  double t = 0.0;
  Field values;
};

struct LevelEnergyOptions {
  double gamma = -0.5;
  double nu = 0.75;
  double c0 = 1.0;
};

/// E_l(T1, T2) = sup_{t in [T1, T2]} [1/2 ||f_l^+(t)||^2 + c0/2 int_{T1}^t ||<v>^{gamma/2} f_l^+||_{H^nu}^2],
/// with ||g||_{H^nu}^2 = ||g||_{L^2}^2 + seminorm^2 and the time integral by the
/// trapezoid rule over recorded snapshots.
double level_energy_functional(const std::vector<Snapshot>& trajectory, const VelocityGrid& grid,
                               double level, double t1, double t2,
                               const LevelEnergyOptions& options = {});

/// Coercivity coefficient (2 pi / 7) kappa0^5 min(1, theta) lambda_min(int f v v^T).
double coercivity_coefficient(const DistributionState& f, double theta);

}  // namespace bfd
