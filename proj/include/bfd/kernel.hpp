#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "bfd/grid.hpp"

namespace bfd {

/// Angular factor b(cos theta) under Grad's cutoff with b >= b0 > 0.
struct AngularModel {
  enum class Kind { constant, truncated_power };

  Kind kind = Kind::constant;
  double b0 = 1.0;
  /// truncated_power only: b = b0 + C * max(theta, theta_cut)^(-2 - 2 nu).
  double C = 0.0;
  double theta_cut = 0.1;
};

/// B(v - v_*, sigma) = |v - v_*|^gamma * b(cos theta), moderately soft regime.
struct CollisionKernelSpec {
  double gamma = -0.5;
  double nu = 0.75;
  AngularModel angular;

  /// Throws unless gamma in (-2, 0), nu in (0, 1), gamma + 2 nu > 0 and the
  /// angular model is admissible.
  void validate() const;

  bool constant_angular() const { return angular.kind == AngularModel::Kind::constant; }
};

/// Same kernel with b multiplied by `factor` (used for B / eps scalings).
CollisionKernelSpec scaled_kernel(const CollisionKernelSpec& spec, double factor);

double angular_factor(const CollisionKernelSpec& spec, double cos_theta);

/// |v - v_*|^gamma; zero at r = 0 (coincident pairs are excluded by the caller).
inline double kinetic_factor(const CollisionKernelSpec& spec, double r) {
  return r > 0.0 ? std::pow(r, spec.gamma) : 0.0;
}

/// 2 pi * int_0^pi b(cos theta) sin(theta) d theta.
double angular_l1_norm(const CollisionKernelSpec& spec);

/// 2 pi * int_0^{pi/2} b(cos theta) sin^3(theta) d theta (weighted angular mass
/// entering the L^1-moment production constant).
double angular_sin3_half_integral(const CollisionKernelSpec& spec);

constexpr double unit_tolerance = 1e-12;

namespace detail {
template <typename Scalar>
void require_unit(const Vector3<Scalar>& x, const char* what) {
  using std::abs;
  if (!(abs(x.norm() - Scalar(1)) <= Scalar(unit_tolerance))) {
    throw Error(std::string(what) + " must be a unit vector");
  }
}
}  // namespace detail

/// sigma-representation: v' = (v + v_*)/2 + |v - v_*| sigma / 2 and
/// v'_* = (v + v_*)/2 - |v - v_*| sigma / 2.
template <typename Scalar>
std::pair<Vector3<Scalar>, Vector3<Scalar>> post_collision_sigma(const Vector3<Scalar>& v,
                                                                 const Vector3<Scalar>& v_star,
                                                                 const Vector3<Scalar>& sigma) {
  detail::require_unit(sigma, "sigma");
  const Vector3<Scalar> center = (v + v_star) / Scalar(2);
  const Vector3<Scalar> half_gap = (v - v_star).norm() / Scalar(2) * sigma;
  return {center + half_gap, center - half_gap};
}

/// omega-representation: v' = v - <v - v_*, omega> omega and
/// v'_* = v_* + <v - v_*, omega> omega.
template <typename Scalar>
std::pair<Vector3<Scalar>, Vector3<Scalar>> post_collision_omega(const Vector3<Scalar>& v,
                                                                 const Vector3<Scalar>& v_star,
                                                                 const Vector3<Scalar>& omega) {
  detail::require_unit(omega, "omega");
  const Vector3<Scalar> shift = (v - v_star).dot(omega) * omega;
  return {v - shift, v_star + shift};
}

/// sigma = n - 2 <n, omega> omega.
template <typename Scalar>
Vector3<Scalar> sigma_from_omega(const Vector3<Scalar>& n, const Vector3<Scalar>& omega) {
  detail::require_unit(n, "n");
  detail::require_unit(omega, "omega");
  return n - Scalar(2) * n.dot(omega) * omega;
}

}  // namespace bfd
