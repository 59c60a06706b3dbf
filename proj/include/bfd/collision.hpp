#pragma once

#include <algorithm>
#include <cmath>

#include "bfd/kernel.hpp"
#include "bfd/sphere.hpp"
#include "bfd/state.hpp"

namespace bfd {

/// Discrete mass, momentum and energy carried by a per-node field.
struct ConservationDefects {
  double mass = 0.0;
  Vec3 momentum = Vec3::Zero();
  double energy = 0.0;

  double max_abs() const {
    return std::max({std::abs(mass), momentum.cwiseAbs().maxCoeff(), std::abs(energy)});
  }
};

/// Metric used by the conservation projection.
///
/// `uniform` is the plain weighted least-squares projection onto
/// span{1, v, |v|^2}. `occupancy` removes the defect along
/// f(1 - eps f) * span{1, v, |v|^2}, so the correction vanishes wherever the
/// state sits at 0 or at the Pauli ceiling; time stepping uses it.
enum class ProjectionWeight { uniform, occupancy };

struct CollisionResult {
  Field values;
  /// Coefficient of -f_i in the loss term at every node.
  Field loss_rate;
  /// Defects of the raw operator, measured before any correction.
  ConservationDefects defects;
  bool corrected = false;
};

/// Q(f, f) by direct quadrature over the lattice (v_*) and the sphere rule
/// (sigma); gain terms sample f trilinearly at v' and v'_*, and coincident
/// pairs v_* = v are skipped.
CollisionResult collision_operator(const DistributionState& f, const CollisionKernelSpec& spec,
                                   const SphereQuadrature& sphere, bool correct,
                                   ProjectionWeight weight = ProjectionWeight::uniform);

/// Classical Boltzmann operator f'f'_* - f f_* on its own code path
/// (no blocking factors, no correction).
Field collision_operator_classical(const Field& f, const VelocityGrid& grid,
                                   const CollisionKernelSpec& spec,
                                   const SphereQuadrature& sphere);

ConservationDefects conservation_defects(const Field& q, const VelocityGrid& grid);

/// Q - P(Q) with P the weighted least-squares projection onto
/// span{1, v_x, v_y, v_z, |v|^2}.
Field conservation_correction(const Field& q, const VelocityGrid& grid);

/// Q - profile * (Psi lambda): removes the five defects along
/// profile * span{1, v, |v|^2}. `profile` must be non-negative.
Field conservation_correction(const Field& q, const VelocityGrid& grid, const Field& profile);

/// Which identity of the cancellation lemma to evaluate.
enum class CancellationIdentity { gain_point, partner_point };
enum class CancellationSide { direct, reduced };

struct CancellationSetup {
  Vec3 probe = Vec3::Zero();
  /// Phi(r) = r^gamma on lambda < r <= cutoff, zero elsewhere.
  double lambda = 1.0;
  /// Upper radius of the kinetic factor; <= 0 selects the box half width.
  double cutoff = 0.0;
  int radial_points = 96;
  int sphere_order = 41;
};

/// Either side of the cancellation identities for int int b Phi f(v') (or
/// f(v'_*)) d sigma d v_*, with f the trilinear interpolant of the sample.
///
/// `direct` integrates over v_* = probe + r e in spherical coordinates (radial
/// Gauss-Legendre, sphere rule for e and sigma). `reduced` evaluates the
/// one-dimensional angular kernel by adaptive quadrature and integrates it
/// against f on spherical shells about the probe.
double cancellation_oracle(const DistributionState& f, const CollisionKernelSpec& spec,
                           const CancellationSetup& setup, CancellationIdentity identity,
                           CancellationSide side);

/// max_i |Q_{B/eps, 1}(eps f)_i - eps Q_{B, eps}(f)_i| / max_i |eps Q_{B, eps}(f)_i|.
double scaling_identity_check(const DistributionState& f, const CollisionKernelSpec& spec,
                              const SphereQuadrature& sphere);

namespace testing {
/// Fault injection for the verification suite: when set, the conservation
/// projection becomes the identity.
void set_projection_fault(bool enabled);
bool projection_fault();
}  // namespace testing

namespace detail {

struct SweepRequest {
  bool quantum = true;
  bool entropy = false;
  /// Exponent of |v - v_*| used for the entropy production.
  double entropy_eta = 0.0;
};

struct SweepOutput {
  Field gain_minus_loss;
  Field loss_rate;
  double entropy_production = 0.0;
};

/// Single pass over unordered lattice pairs and half of the sphere rule,
/// accumulating Q, loss rates and (optionally) the entropy production.
SweepOutput pair_sweep(const DistributionState& f, const CollisionKernelSpec& spec,
                       const SphereQuadrature& sphere, const SweepRequest& request);

constexpr double log_floor = 1e-30;

}  // namespace detail

}  // namespace bfd
