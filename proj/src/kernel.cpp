#include "bfd/kernel.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace bfd {

namespace {

using Kind = AngularModel::Kind;

double power_exponent(const CollisionKernelSpec& spec) { return 2.0 + 2.0 * spec.nu; }

double b_of_theta(const CollisionKernelSpec& spec, double theta) {
  const AngularModel& a = spec.angular;
  if (a.kind == Kind::constant) return a.b0;
  return a.b0 + a.C * std::pow(std::max(theta, a.theta_cut), -power_exponent(spec));
}

template <typename Fn>
double integrate_angle(Fn&& fn, double lo, double hi) {
  if (hi <= lo) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, lo, hi, 15, 1e-14,
                                                                       &error);
}

}  // namespace

void CollisionKernelSpec::validate() const {
  if (!(gamma > -2.0 && gamma < 0.0)) {
    throw Error("kernel: gamma must lie in (-2, 0), got " + std::to_string(gamma));
  }
  if (!(nu > 0.0 && nu < 1.0)) {
    throw Error("kernel: nu must lie in (0, 1), got " + std::to_string(nu));
  }
  if (!(gamma + 2.0 * nu > 0.0)) {
    throw Error("kernel: gamma + 2 nu = " + std::to_string(gamma + 2.0 * nu) +
                " is not positive (moderately soft regime required)");
  }
  if (!(angular.b0 > 0.0) || !std::isfinite(angular.b0)) {
    throw Error("kernel: angular lower bound b0 must be positive and finite");
  }
  if (angular.kind == Kind::truncated_power) {
    if (!(angular.C >= 0.0) || !std::isfinite(angular.C)) {
      throw Error("kernel: truncated_power constant C must be non-negative");
    }
    if (!(angular.theta_cut > 0.0 && angular.theta_cut <= std::numbers::pi)) {
      throw Error("kernel: theta_cut must lie in (0, pi]");
    }
  }
}

CollisionKernelSpec scaled_kernel(const CollisionKernelSpec& spec, double factor) {
  CollisionKernelSpec out = spec;
  out.angular.b0 *= factor;
  out.angular.C *= factor;
  return out;
}

double angular_factor(const CollisionKernelSpec& spec, double cos_theta) {
  if (!(cos_theta >= -1.0 && cos_theta <= 1.0)) {
    throw Error("angular_factor: cos(theta) outside [-1, 1]");
  }
  if (spec.angular.kind == Kind::constant) return spec.angular.b0;
  return b_of_theta(spec, std::acos(cos_theta));
}

double angular_l1_norm(const CollisionKernelSpec& spec) {
  const double pi = std::numbers::pi;
  if (spec.angular.kind == Kind::constant) return 4.0 * pi * spec.angular.b0;
  auto integrand = [&](double t) { return b_of_theta(spec, t) * std::sin(t); };
  const double cut = std::min(spec.angular.theta_cut, pi);
  return 2.0 * pi * (integrate_angle(integrand, 0.0, cut) + integrate_angle(integrand, cut, pi));
}

double angular_sin3_half_integral(const CollisionKernelSpec& spec) {
  const double pi = std::numbers::pi;
  auto integrand = [&](double t) {
    const double s = std::sin(t);
    return b_of_theta(spec, t) * s * s * s;
  };
  if (spec.angular.kind == Kind::constant) return 2.0 * pi * spec.angular.b0 * (2.0 / 3.0);
  const double cut = std::min(spec.angular.theta_cut, pi / 2);
  return 2.0 * pi *
         (integrate_angle(integrand, 0.0, cut) + integrate_angle(integrand, cut, pi / 2));
}

}  // namespace bfd
