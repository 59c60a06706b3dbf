#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include <Eigen/Core>

namespace bfd {

using Vec3 = Eigen::Vector3d;
using Field = Eigen::ArrayXd;

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated cubic lattice [-L, L]^3 with N cell-centred nodes per axis.
///
/// Node (i, j, k) sits at (-L + (i + 1/2) h, ...), h = 2L / N, and carries the
/// cell volume h^3 as its quadrature weight. For even N no node sits at the
/// origin. Flat indices run k fastest.
class VelocityGrid {
 public:
  VelocityGrid(double half_width, int points_per_axis);

  double half_width() const { return half_width_; }
  int points_per_axis() const { return n_; }
  double spacing() const { return spacing_; }
  double cell_volume() const { return spacing_ * spacing_ * spacing_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  double axis(int i) const { return -half_width_ + (i + 0.5) * spacing_; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  std::array<int, 3> unflatten(std::size_t flat) const {
    const auto k = static_cast<int>(flat % n_);
    const auto j = static_cast<int>((flat / n_) % n_);
    const auto i = static_cast<int>(flat / (static_cast<std::size_t>(n_) * n_));
    return {i, j, k};
  }
  Vec3 node(std::size_t flat) const {
    const auto [i, j, k] = unflatten(flat);
    return {axis(i), axis(j), axis(k)};
  }

  /// Samples `fn(Vec3)` at every node.
  template <typename Fn>
  Field evaluate(Fn&& fn) const {
    Field out(static_cast<Eigen::Index>(size()));
    for (std::size_t p = 0; p < size(); ++p) out(static_cast<Eigen::Index>(p)) = fn(node(p));
    return out;
  }

  bool operator==(const VelocityGrid& other) const {
    return n_ == other.n_ && half_width_ == other.half_width_;
  }

 private:
  double half_width_;
  int n_;
  double spacing_;
};

VelocityGrid build_grid(double half_width, int points_per_axis);

/// Midpoint rule: sum of values times the cell volume.
double integrate_grid(const Field& values, const VelocityGrid& grid);

/// Trilinear interpolation of node values; zero outside the node hull
/// [-L + h/2, L - h/2]^3.
double trilinear_sample(const Field& values, const VelocityGrid& grid, const Vec3& v);

namespace detail {

/// Trilinear lookup in lattice index coordinates (node i at coordinate i).
/// Hot path of the collision sweep; no argument checking.
inline double sample_index_space(const double* values, int n, double x, double y, double z) {
  constexpr double slack = 1e-9;
  const double top = n - 1;
  if (!(x >= -slack && y >= -slack && z >= -slack && x <= top + slack && y <= top + slack && z <= top + slack)) {
    return 0.0;
  }
  x = std::clamp(x, 0.0, top);
  y = std::clamp(y, 0.0, top);
  z = std::clamp(z, 0.0, top);
  int i = static_cast<int>(x);
  int j = static_cast<int>(y);
  int k = static_cast<int>(z);
  if (i > n - 2) i = n - 2;
  if (j > n - 2) j = n - 2;
  if (k > n - 2) k = n - 2;
  const double tx = x - i;
  const double ty = y - j;
  const double tz = z - k;
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const double* p = values + i * nn + static_cast<std::size_t>(j) * n + k;
  const double c00 = p[0] + tz * (p[1] - p[0]);
  const double c01 = p[n] + tz * (p[n + 1] - p[n]);
  const double c10 = p[nn] + tz * (p[nn + 1] - p[nn]);
  const double c11 = p[nn + n] + tz * (p[nn + n + 1] - p[nn + n]);
  const double c0 = c00 + ty * (c01 - c00);
  const double c1 = c10 + ty * (c11 - c10);
  return c0 + tx * (c1 - c0);
}

}  // namespace detail

}  // namespace bfd
