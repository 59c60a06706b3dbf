#include "bfd/grid.hpp"
#include "bfd/state.hpp"

#include <string>

namespace bfd {

VelocityGrid::VelocityGrid(double half_width, int points_per_axis)
    : half_width_(half_width), n_(points_per_axis), spacing_(0.0) {
  if (!std::isfinite(half_width) || half_width <= 0.0) {
    throw Error("velocity grid: half width must be finite and positive, got " +
                std::to_string(half_width));
  }
  if (points_per_axis < 4 || points_per_axis % 2 != 0) {
    throw Error("velocity grid: points per axis must be even and >= 4, got " +
                std::to_string(points_per_axis));
  }
  spacing_ = 2.0 * half_width / points_per_axis;
}

VelocityGrid build_grid(double half_width, int points_per_axis) {
  return VelocityGrid(half_width, points_per_axis);
}

double integrate_grid(const Field& values, const VelocityGrid& grid) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw Error("integrate_grid: expected " + std::to_string(grid.size()) + " values, got " +
                std::to_string(values.size()));
  }
  return values.sum() * grid.cell_volume();
}

double trilinear_sample(const Field& values, const VelocityGrid& grid, const Vec3& v) {
  if (!v.allFinite()) throw Error("trilinear_sample: non-finite sample point");
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw Error("trilinear_sample: value count does not match grid");
  }
  const double inv_h = 1.0 / grid.spacing();
  const double shift = grid.half_width() * inv_h - 0.5;
  return detail::sample_index_space(values.data(), grid.points_per_axis(), v.x() * inv_h + shift,
                                    v.y() * inv_h + shift, v.z() * inv_h + shift);
}

void DistributionState::validate(double slack) const {
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw Error("distribution state: expected " + std::to_string(grid.size()) + " values, got " +
                std::to_string(values.size()));
  }
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw Error("distribution state: eps must be finite and non-negative");
  }
  const double ceiling = pauli_bound() + slack;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values(i);
    if (!std::isfinite(v)) throw Error("distribution state: non-finite value at node " + std::to_string(i));
    if (v < -slack) {
      throw Error("distribution state: negative value " + std::to_string(v) + " at node " +
                  std::to_string(i));
    }
    if (v > ceiling) {
      throw Error("distribution state: Pauli bound violated at node " + std::to_string(i) +
                  " (f = " + std::to_string(v) + ", 1/eps = " + std::to_string(pauli_bound()) + ")");
    }
  }
}

}  // namespace bfd
