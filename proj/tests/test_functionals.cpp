#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bfd/equilibria.hpp"
#include "bfd/functionals.hpp"

using namespace bfd;
using std::numbers::pi;

namespace {

Field maxwellian(const VelocityGrid& g, double theta = 1.0) {
  return g.evaluate([&](const Vec3& v) { return std::pow(2.0 * pi * theta, -1.5) * std::exp(-0.5 * v.squaredNorm() / theta); });
}

Field random_field(const VelocityGrid& g, double top, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, top);
  Field f(static_cast<Eigen::Index>(g.size()));
  for (auto& x : f) x = u(rng);
  return f;
}

}  // namespace

TEST_CASE("moments") {
  const VelocityGrid box(1.0, 4);
  const MomentReport c = moment(Field::Ones(64), box, 0.0);
  CHECK(c.m == 8.0);
  CHECK(c.M == 8.0);
  CHECK(c.E == 12.0);

  const VelocityGrid g(7.0, 28);
  const MomentReport m = moment(maxwellian(g), g, 2.0);
  CHECK(m.m == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(m.M == doctest::Approx(integrate_grid(maxwellian(g).square() * g.evaluate([](const Vec3& v) { return 1.0 + v.squaredNorm(); }), g)));
  CHECK(moment(maxwellian(g), g, 4.0).m > m.m);
}

TEST_CASE("entropy values") {
  const VelocityGrid box(1.0, 4);
  CHECK(entropy_S(DistributionState(box, Field::Constant(64, 0.5), 1.0)) == doctest::Approx(8.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(entropy_S(DistributionState(box, Field::Constant(64, 0.5), 1.0)) == doctest::Approx(5.5452).epsilon(1e-4));
  CHECK(entropy_S(DistributionState(box, Field::Constant(64, 0.125), 4.0)) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(entropy_S(DistributionState(box, Field::Zero(64), 2.0)) == 0.0);
  CHECK(entropy_S(DistributionState(box, Field::Constant(64, 0.5), 2.0)) == 0.0);

  const VelocityGrid g(7.0, 28);
  const double classical = 1.5 * (1.0 + std::log(2.0 * pi));
  CHECK(entropy_S(DistributionState(g, maxwellian(g), 0.0)) == doctest::Approx(classical).epsilon(1e-5));
  CHECK(classical == doctest::Approx(4.2568).epsilon(1e-4));
  CHECK(boltzmann_entropy(maxwellian(g), g) == doctest::Approx(-classical).epsilon(1e-5));

  // small eps approaches the classical value shifted by the mass term
  const Field f = maxwellian(g);
  const double small = entropy_S(DistributionState(g, f, 1e-6));
  const double mass = integrate_grid(f, g);
  const double limit = entropy_S(DistributionState(g, f, 0.0)) + mass * (1.0 - std::log(1e-6));
  CHECK(small == doctest::Approx(limit).epsilon(1e-7));
  CHECK_THROWS_AS(boltzmann_entropy(Field::Constant(64, -1.0), box), Error);
}

TEST_CASE("psi_eps") {
  CHECK(psi_eps(0.25, 2.0) == 0.5);
  CHECK(psi_eps(0.3, 0.0) == 0.3);
  CHECK(psi_eps(0.0, 5.0) == 0.0);
  double prev = -1.0;
  for (int k = 0; k < 50; ++k) {
    const double x = 0.0199 * k;
    REQUIRE(psi_eps(x, 1.0) > prev);
    prev = psi_eps(x, 1.0);
  }
}

TEST_CASE("relative entropy and Csiszar-Kullback") {
  const VelocityGrid g(4.0, 10);
  const double eps = 2.0;
  const Field f = g.evaluate([](const Vec3& v) {
    return 0.2 * std::exp(-(v - Vec3(0.7, 0.0, 0.0)).squaredNorm()) + 0.15 * std::exp(-(v + Vec3(0.5, 0.2, 0.0)).squaredNorm());
  });
  const DistributionState state(g, f, eps);
  const DistributionState eq = discrete_equilibrium(grid_moments(f, g), eps, g);
  CHECK(relative_entropy(eq, eq) == 0.0);
  CHECK(relative_entropy(state, eq) > 0.0);

  const CsiszarKullback ck = csiszar_kullback_gap(state, eq);
  CHECK(ck.lhs > 0.0);
  CHECK(ck.lhs <= ck.mid);
  CHECK(std::sqrt(ck.lhs) <= ck.rhs);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> mix(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const double a = mix(rng);
    const Field blend = a * f + (1.0 - a) * random_field(g, 0.1, 100 + k);
    const DistributionState s(g, blend, eps);
    const DistributionState m = discrete_equilibrium(grid_moments(blend, g), eps, g);
    REQUIRE(relative_entropy(s, m) >= 0.0);
    const CsiszarKullback c = csiszar_kullback_gap(s, m);
    REQUIRE(c.lhs <= c.mid * (1.0 + 1e-12));
  }

  const DistributionState other(g, 2.0 * f, eps);
  CHECK_THROWS_AS(csiszar_kullback_gap(other, eq), Error);
  CHECK_THROWS_AS(relative_entropy(state, DistributionState(g, f, 1.0)), Error);
}

TEST_CASE("entropy production is non-negative") {
  const VelocityGrid g(3.0, 6);
  const SphereQuadrature s = build_sphere_quadrature(5);
  CHECK(entropy_production(DistributionState(g, Field::Zero(216), 1.0), {}, s, -0.5) == 0.0);
  CollisionKernelSpec power;
  power.nu = 0.5;
  power.angular.kind = AngularModel::Kind::truncated_power;
  power.angular.b0 = 0.2;
  power.angular.theta_cut = 0.3;
  for (double eps : {0.0, 0.5, 3.0}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const DistributionState f(g, random_field(g, eps > 0.0 ? 0.9 / eps : 1.0, seed), eps);
      REQUIRE(entropy_production(f, {}, s, -0.5) >= 0.0);
      REQUIRE(entropy_production(f, power, s, 0.0) >= 0.0);
    }
  }
  CHECK_THROWS_AS(entropy_production(DistributionState(g, Field::Zero(216), 1.0), {}, s, NAN), Error);
}

TEST_CASE("level sets") {
  Field f(4);
  f << 0.1, 0.5, 0.9, 0.3;
  const Field p = level_set_positive(f, 0.4);
  CHECK(p(0) == 0.0);
  CHECK(p(1) == doctest::Approx(0.1));
  CHECK(p(2) == doctest::Approx(0.5));
  CHECK(p(3) == 0.0);
  CHECK(level_set_positive(f, 0.0).isApprox(f));
  CHECK_THROWS_AS(level_set_positive(f, -1.0), Error);
}

TEST_CASE("Sobolev seminorm") {
  const VelocityGrid g(2.0, 16);
  const Field r = random_field(g, 1.0, 8);
  CHECK(sobolev_seminorm_sq(r, g, 0.0) == doctest::Approx(integrate_grid(r.square(), g)).epsilon(1e-12));

  // a box-periodic plane wave picks up |xi|^{2 nu}
  for (int m : {1, 3}) {
    const double xi = pi * m / g.half_width();
    const Field wave = g.evaluate([&](const Vec3& v) { return std::cos(xi * v.y()); });
    const double l2 = integrate_grid(wave.square(), g);
    CHECK(sobolev_seminorm_sq(wave, g, 1.0) == doctest::Approx(xi * xi * l2).epsilon(1e-10));
    CHECK(sobolev_seminorm_sq(wave, g, 0.5) == doctest::Approx(xi * l2).epsilon(1e-10));
  }
  CHECK(sobolev_seminorm_sq(Field::Constant(4096, 3.0), g, 0.75) == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("level energy functional") {
  const VelocityGrid g(3.0, 8);
  std::vector<Snapshot> traj;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.5 * k;
    traj.push_back({t, maxwellian(g, 0.3 + 0.05 * k)});
  }
  const double peak = maxwellian(g, 0.3).maxCoeff();
  double prev = 0.0;
  for (double t2 : {1.0, 2.0, 3.5, 5.0}) {
    const double e = level_energy_functional(traj, g, 0.1 * peak, 0.0, t2);
    CHECK(e >= prev);
    prev = e;
  }
  double prev_level = INFINITY;
  for (double frac : {0.0, 0.2, 0.5, 0.9}) {
    const double e = level_energy_functional(traj, g, frac * peak, 0.0, 5.0);
    CHECK(e <= prev_level);
    prev_level = e;
  }
  CHECK(level_energy_functional(traj, g, 2.0 * peak, 0.0, 5.0) == 0.0);

  // a single snapshot in the window reduces to half the squared L2 norm
  const Field plus = level_set_positive(traj[2].values, 0.2 * peak);
  CHECK(level_energy_functional(traj, g, 0.2 * peak, 0.9, 1.1) == doctest::Approx(0.5 * integrate_grid(plus.square(), g)));
  CHECK_THROWS_AS(level_energy_functional(traj, g, 0.1, 2.0, 1.0), Error);
  CHECK_THROWS_AS(level_energy_functional(traj, g, 0.1, 5.1, 6.0), Error);
}

TEST_CASE("coercivity coefficient") {
  const VelocityGrid g(7.0, 28);
  const DistributionState m(g, maxwellian(g), 0.0);
  CHECK(coercivity_coefficient(m, 1.0) == doctest::Approx(2.0 * pi / 7.0).epsilon(1e-5));
  CHECK(coercivity_coefficient(m, 0.5) == doctest::Approx(pi / 7.0).epsilon(1e-5));
  const DistributionState q(g, maxwellian(g), 0.5 / maxwellian(g).maxCoeff());
  CHECK(coercivity_coefficient(q, 1.0) == doctest::Approx(2.0 * pi / 7.0 / 32.0).epsilon(1e-5));
  CHECK_THROWS_AS(coercivity_coefficient(m, 0.0), Error);
}
