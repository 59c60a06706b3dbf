#pragma once

#include <cstdint>
#include <string>

#include "bfd/state.hpp"

namespace bfd {

struct InitialDatum {
  enum class Family { maxwellian, fermi_dirac, two_maxwellian_mixture, saturated, perturbed_equilibrium };

  Family family = Family::maxwellian;
  double rho = 1.0;
  Vec3 u = Vec3::Zero();
  double theta = 1.0;

  // two_maxwellian_mixture: components at u +- separation e_x with
  // temperature component_theta and mass fractions (weight, 1 - weight).
  double separation = 1.0;
  double component_theta = 0.5;
  double weight = 0.5;

  // perturbed_equilibrium: M (1 + amplitude q_0 + mode_amplitude sum_m q_m) with
  // q_S(v) = (w^T S w / theta) exp(-|w|^2 / (4 theta)), w = v - u, S traceless;
  // q_0 uses S = diag(1, -1, 0), the q_m are seeded random.
  double amplitude = 0.1;
  int modes = 2;
  double mode_amplitude = 0.02;
};

std::string family_name(InitialDatum::Family family);
InitialDatum::Family parse_family(const std::string& name);

/// Continuum mass and temperature of the datum (used to place eps against eps_sat).
struct DatumMoments {
  double rho = 0.0;
  double theta = 0.0;
};
DatumMoments datum_moments(const InitialDatum& datum, double eps);

/// Samples the datum; throws when the sample violates 0 <= f <= 1/eps.
DistributionState build_initial_state(const InitialDatum& datum, const VelocityGrid& grid,
                                      double eps, std::uint64_t seed);

}  // namespace bfd
