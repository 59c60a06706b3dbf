#include "bfd/initial_data.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "bfd/equilibria.hpp"

namespace bfd {

namespace {

double maxwellian(const Vec3& v, double rho, const Vec3& u, double theta) {
  return rho * std::pow(2.0 * std::numbers::pi * theta, -1.5) *
         std::exp(-(v - u).squaredNorm() / (2.0 * theta));
}

Eigen::Matrix3d random_traceless(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Matrix3d s;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      s(i, j) = normal(rng);
      s(j, i) = s(i, j);
    }
  }
  s -= s.trace() / 3.0 * Eigen::Matrix3d::Identity();
  return s / s.norm();
}

}  // namespace

std::string family_name(InitialDatum::Family family) {
  switch (family) {
    case InitialDatum::Family::maxwellian: return "maxwellian";
    case InitialDatum::Family::fermi_dirac: return "fermi_dirac";
    case InitialDatum::Family::two_maxwellian_mixture: return "two_maxwellian_mixture";
    case InitialDatum::Family::saturated: return "saturated";
    case InitialDatum::Family::perturbed_equilibrium: return "perturbed_equilibrium";
  }
  return "unknown";
}

InitialDatum::Family parse_family(const std::string& name) {
  for (auto f : {InitialDatum::Family::maxwellian, InitialDatum::Family::fermi_dirac,
                 InitialDatum::Family::two_maxwellian_mixture, InitialDatum::Family::saturated,
                 InitialDatum::Family::perturbed_equilibrium}) {
    if (family_name(f) == name) return f;
  }
  throw Error("unknown initial family '" + name + "'");
}

DatumMoments datum_moments(const InitialDatum& datum, double eps) {
  switch (datum.family) {
    case InitialDatum::Family::two_maxwellian_mixture: {
      const double w = datum.weight;
      const double d = 2.0 * datum.separation;
      return {datum.rho, datum.component_theta + w * (1.0 - w) * d * d / 3.0};
    }
    case InitialDatum::Family::saturated: {
      if (!(eps > 0.0)) throw Error("saturated datum requires eps > 0");
      const double radius = std::cbrt(3.0 * datum.rho * eps / (4.0 * std::numbers::pi));
      return {datum.rho, radius * radius / 5.0};
    }
    default:
      return {datum.rho, datum.theta};
  }
}

DistributionState build_initial_state(const InitialDatum& datum, const VelocityGrid& grid,
                                      double eps, std::uint64_t seed) {
  if (!(datum.rho > 0.0)) throw Error("initial datum: rho must be positive");
  Field values;
  switch (datum.family) {
    case InitialDatum::Family::maxwellian:
      if (!(datum.theta > 0.0)) throw Error("initial datum: theta must be positive");
      values = grid.evaluate([&](const Vec3& v) { return maxwellian(v, datum.rho, datum.u, datum.theta); });
      break;
    case InitialDatum::Family::fermi_dirac:
      values = sample_equilibrium(solve_fd_params(datum.rho, datum.u, datum.theta, eps), grid).values;
      break;
    case InitialDatum::Family::two_maxwellian_mixture: {
      if (!(datum.component_theta > 0.0)) {
        throw Error("initial datum: component_theta must be positive");
      }
      if (!(datum.weight > 0.0 && datum.weight < 1.0)) {
        throw Error("initial datum: weight must lie in (0, 1)");
      }
      const Vec3 shift(datum.separation, 0.0, 0.0);
      values = grid.evaluate([&](const Vec3& v) {
        return maxwellian(v, datum.weight * datum.rho, datum.u + shift, datum.component_theta) +
               maxwellian(v, (1.0 - datum.weight) * datum.rho, datum.u - shift,
                          datum.component_theta);
      });
      break;
    }
    case InitialDatum::Family::saturated:
      values = saturated_state(datum.rho, datum.u, eps, grid).state.values;
      break;
    case InitialDatum::Family::perturbed_equilibrium: {
      if (datum.modes < 0) throw Error("initial datum: modes must be >= 0");
      const Field base = sample_equilibrium(solve_fd_params(datum.rho, datum.u, datum.theta, eps), grid).values;
      std::mt19937_64 rng(seed);
      Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
      s(0, 0) = datum.amplitude;
      s(1, 1) = -datum.amplitude;
      for (int m = 0; m < datum.modes; ++m) s += datum.mode_amplitude * random_traceless(rng);
      const double theta = datum.theta;
      const Field factor = grid.evaluate([&](const Vec3& v) {
        const Vec3 w = v - datum.u;
        return 1.0 + w.dot(s * w) / theta * std::exp(-w.squaredNorm() / (4.0 * theta));
      });
      values = base * factor;
      break;
    }
  }
  DistributionState state(grid, std::move(values), eps);
  try {
    state.validate();
  } catch (const Error& e) {
    throw Error("initial datum '" + family_name(datum.family) + "' is not admissible: " + e.what());
  }
  return state;
}

}  // namespace bfd
