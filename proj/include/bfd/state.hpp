#pragma once

#include <limits>
#include <utility>

#include "bfd/grid.hpp"

namespace bfd {

/// Grid sample of f(t, .) together with the quantum parameter eps.
struct DistributionState {
  VelocityGrid grid;
  Field values;
  double epsilon = 0.0;
  double time = 0.0;

  DistributionState(VelocityGrid g, Field f, double eps = 0.0, double t = 0.0)
      : grid(g), values(std::move(f)), epsilon(eps), time(t) {}

  /// 1/eps, or +inf in the classical case.
  double pauli_bound() const {
    return epsilon > 0.0 ? 1.0 / epsilon : std::numeric_limits<double>::infinity();
  }

  /// Throws unless the sample is finite, non-negative and obeys the Pauli bound,
  /// each up to `slack`.
  void validate(double slack = 0.0) const;
};

}  // namespace bfd
