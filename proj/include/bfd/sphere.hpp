#pragma once

#include <vector>

#include <Eigen/Core>

#include "bfd/grid.hpp"

namespace bfd {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule (Golub-Welsch, Newton-polished nodes).
GaussLegendre gauss_legendre(int n);

/// Quadrature on the unit sphere S^2, exact for polynomials of degree <= order.
///
/// Product rule: Gauss-Legendre in cos(theta) times the equispaced trapezoid
/// rule in phi. The node set is closed under sigma -> -sigma; `antipode[k]` is
/// the index of -sigma_k and `half` lists one representative of every pair.
struct SphereQuadrature {
  int order = 0;
  Eigen::Matrix3Xd directions;
  Eigen::VectorXd weights;
  std::vector<int> antipode;
  std::vector<int> half;

  Eigen::Index size() const { return weights.size(); }
};

/// Supported orders: odd integers in [1, 99].
SphereQuadrature build_sphere_quadrature(int order);

bool is_supported_sphere_order(int order);

}  // namespace bfd
