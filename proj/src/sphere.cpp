#include "bfd/sphere.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace bfd {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw Error("gauss_legendre: need at least one node");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes(0) = 0.0;
    rule.weights(0) = 2.0;
    return rule;
  }

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);

  for (int k = 0; k < n; ++k) {
    double x = eig.eigenvalues()(k);
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      // Legendre recurrence for P_n(x) and P_n'(x).
      double p0 = 1.0;
      double p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    rule.nodes(k) = x;
    rule.weights(k) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Enforce exact reflection symmetry of the rule.
  for (int k = 0; k < n / 2; ++k) {
    const int m = n - 1 - k;
    const double x = 0.5 * (rule.nodes(m) - rule.nodes(k));
    const double w = 0.5 * (rule.weights(m) + rule.weights(k));
    rule.nodes(k) = -x;
    rule.nodes(m) = x;
    rule.weights(k) = w;
    rule.weights(m) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  return rule;
}

bool is_supported_sphere_order(int order) { return order >= 1 && order <= 99 && order % 2 == 1; }

SphereQuadrature build_sphere_quadrature(int order) {
  if (!is_supported_sphere_order(order)) {
    throw Error("sphere quadrature: unsupported order " + std::to_string(order) +
                " (odd orders 1..99 are available)");
  }
  const int n_polar = (order + 1) / 2;
  const int n_azimuth = order + 1;
  const GaussLegendre gl = gauss_legendre(n_polar);

  SphereQuadrature q;
  q.order = order;
  q.directions.resize(3, n_polar * n_azimuth);
  q.weights.resize(n_polar * n_azimuth);
  q.antipode.assign(n_polar * n_azimuth, -1);

  const double dphi = 2.0 * std::numbers::pi / n_azimuth;
  for (int a = 0; a < n_polar; ++a) {
    const double c = gl.nodes(a);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int b = 0; b < n_azimuth; ++b) {
      const int k = a * n_azimuth + b;
      const double phi = (b + 0.5) * dphi;
      Vec3 d(s * std::cos(phi), s * std::sin(phi), c);
      q.directions.col(k) = d / d.norm();
      q.weights(k) = gl.weights(a) * dphi;
      q.antipode[k] = (n_polar - 1 - a) * n_azimuth + (b + n_azimuth / 2) % n_azimuth;
    }
  }
  // Make antipodal pairs exact negatives of each other.
  for (int k = 0; k < q.size(); ++k) {
    const int m = q.antipode[k];
    if (k < m) {
      q.directions.col(m) = -q.directions.col(k);
      q.half.push_back(k);
    }
  }
  return q;
}

}  // namespace bfd
