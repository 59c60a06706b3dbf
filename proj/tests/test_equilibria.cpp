#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bfd/collision.hpp"
#include "bfd/equilibria.hpp"
#include "bfd/functionals.hpp"

using namespace bfd;
using std::numbers::pi;

namespace {

// 4 pi int_0^inf r^{2+2k} a e^{-b r^2} / (1 + eps a e^{-b r^2}) dr on a plain
// truncated interval, independent of the solver's split.
double radial_moment(double a, double b, double eps, int k) {
  auto fn = [&](double r) {
    const double m = a * std::exp(-b * r * r);
    return std::pow(r, 2 + 2 * k) * m / (1.0 + eps * m);
  };
  return 4.0 * pi * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(fn, 0.0, 60.0 / std::sqrt(b), 20, 1e-13);
}

}  // namespace

TEST_CASE("fd_moments") {
  const FdMoments m = fd_moments(0.3, 0.7, 0.0);
  CHECK(m.mass == doctest::Approx(0.3 * std::pow(pi / 0.7, 1.5)).epsilon(1e-12));
  CHECK(m.energy == doctest::Approx(1.5 * 0.3 / 0.7 * std::pow(pi / 0.7, 1.5)).epsilon(1e-12));

  const FdMoments lin = fd_moments(1e-8, 0.5, 1.0);
  CHECK(lin.mass == doctest::Approx(1e-8 * std::pow(2.0 * pi, 1.5)).epsilon(1e-7));

  for (auto [a, b, eps] : {std::tuple{2.0, 0.5, 1.0}, std::tuple{1e4, 3.0, 0.2}, std::tuple{50.0, 1.0, 7.0}}) {
    const FdMoments q = fd_moments(a, b, eps);
    CHECK(q.mass == doctest::Approx(radial_moment(a, b, eps, 0)).epsilon(1e-10));
    CHECK(q.energy == doctest::Approx(radial_moment(a, b, eps, 1)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(fd_moments(-1.0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(fd_moments(1.0, 1.0, -0.1), Error);
}

TEST_CASE("epsilon_sat") {
  CHECK(epsilon_sat(1.0, 0.2) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));
  CHECK(epsilon_sat(1.0, 0.2) == doctest::Approx(4.18879).epsilon(1e-6));
  CHECK(epsilon_sat(1.0, 1.0) == doctest::Approx(46.8321).epsilon(1e-6));
  CHECK(epsilon_sat(2.0, 0.7) == doctest::Approx(epsilon_sat(1.0, 0.7) / 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(epsilon_sat(0.0, 1.0), Error);
}

TEST_CASE("solve_fd_params") {
  SUBCASE("classical closed form") {
    const FermiDiracParams p = solve_fd_params(1.0, Vec3::Zero(), 1.0, 0.0);
    CHECK(p.a == doctest::Approx(0.0634936359342410).epsilon(1e-13));
    CHECK(p.b == 0.5);
  }
  SUBCASE("small eps limit") {
    const FermiDiracParams p = solve_fd_params(1.0, Vec3::Zero(), 1.0, 1e-8);
    CHECK(std::abs(p.a - std::pow(2.0 * pi, -1.5)) < 1e-6);
    CHECK(std::abs(p.b - 0.5) < 1e-6);
  }
  SUBCASE("near saturation") {
    const double eps = 0.99 * epsilon_sat(1.0, 0.2);
    const FermiDiracParams p = solve_fd_params(1.0, Vec3::Zero(), 0.2, eps);
    CHECK(p.mass_residual < 1e-10);
    CHECK(p.energy_residual < 1e-10);
    CHECK(p.max_density() < 1.0 / eps);
    CHECK(eps * p.max_density() > 0.99);
  }
  SUBCASE("admissibility boundary") {
    for (auto [rho, theta] : {std::pair{1.0, 1.0}, std::pair{0.4, 0.3}, std::pair{3.0, 2.0}}) {
      CHECK_NOTHROW(solve_fd_params(rho, Vec3::Zero(), theta, 0.9 * epsilon_sat(rho, theta)));
      CHECK_THROWS_AS(solve_fd_params(rho, Vec3::Zero(), theta, 1.01 * epsilon_sat(rho, theta)), Error);
    }
  }
  SUBCASE("round trip through fd_moments") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> r(0.2, 3.0), t(0.1, 2.0), fr(0.0, 0.95);
    for (int k = 0; k < 25; ++k) {
      const double rho = r(rng), theta = t(rng), eps = fr(rng) * epsilon_sat(rho, theta);
      const FermiDiracParams p = solve_fd_params(rho, Vec3(0.1, 0.0, -0.2), theta, eps);
      const FdMoments m = fd_moments(p.a, p.b, eps);
      REQUIRE(m.mass == doctest::Approx(rho).epsilon(1e-10));
      REQUIRE(m.energy == doctest::Approx(3.0 * rho * theta).epsilon(1e-10));
    }
  }
  SUBCASE("peak occupancy grows with eps") {
    double prev_occ = 0.0, prev_peak = INFINITY;
    for (double f : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
      const double eps = f * epsilon_sat(1.0, 1.0);
      const FermiDiracParams p = solve_fd_params(1.0, Vec3::Zero(), 1.0, eps);
      CHECK(eps * p.max_density() > prev_occ);
      CHECK(p.max_density() < prev_peak);
      prev_occ = eps * p.max_density();
      prev_peak = p.max_density();
    }
  }
  CHECK_THROWS_AS(solve_fd_params(-1.0, Vec3::Zero(), 1.0, 0.0), Error);
}

TEST_CASE("sample_equilibrium") {
  const VelocityGrid g(6.0, 24);
  const FermiDiracParams classical = solve_fd_params(1.0, Vec3::Zero(), 1.0, 0.0);
  const DistributionState m = sample_equilibrium(classical, g);
  for (std::size_t p = 0; p < g.size(); p += 101) {
    const Vec3 v = g.node(p);
    REQUIRE(m.values(static_cast<Eigen::Index>(p)) ==
            doctest::Approx(std::pow(2.0 * pi, -1.5) * std::exp(-0.5 * v.squaredNorm())).epsilon(1e-14));
  }

  const double eps = 0.7 * epsilon_sat(1.0, 0.5);
  const FermiDiracParams q = solve_fd_params(1.0, Vec3(0.5, 0.0, 0.0), 0.5, eps);
  double prev = INFINITY;
  for (int n : {8, 16, 32}) {
    const VelocityGrid h(5.0, n);
    const DistributionState s = sample_equilibrium(q, h);
    CHECK(s.values.maxCoeff() < 1.0 / eps);
    const GridMoments gm = grid_moments(s.values, h);
    const double defect = std::abs(gm.mass - 1.0);
    CHECK(defect <= prev);
    prev = defect;
    if (n == 32) CHECK(gm.momentum.x() / gm.mass == doctest::Approx(0.5).epsilon(1e-4));
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("saturated_state") {
  const double eps = 4.0 * pi / 3.0;
  const VelocityGrid g(2.0, 16);
  const SaturatedState s = saturated_state(1.0, Vec3::Zero(), eps, g);
  CHECK(s.radius == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.state.values.maxCoeff() == doctest::Approx(1.0 / eps));
  CHECK_THROWS_AS(saturated_state(1.0, Vec3::Zero(), 100.0, g), Error);
  CHECK_THROWS_AS(saturated_state(1.0, Vec3(1.5, 0.0, 0.0), eps, g), Error);

  // energy of the ball with R^2 = 5 theta is 3 rho theta (continuum); the grid
  // sample gets close on a fine lattice
  const double theta = 0.2;
  const double e = epsilon_sat(1.0, theta);
  const VelocityGrid fine(1.5, 48);
  const SaturatedState f = saturated_state(1.0, Vec3::Zero(), e, fine);
  CHECK(f.radius * f.radius == doctest::Approx(5.0 * theta).epsilon(1e-12));
  const GridMoments m = grid_moments(f.state.values, fine);
  CHECK(m.energy == doctest::Approx(3.0 * theta).epsilon(0.05));
  CHECK(std::abs(f.mass_defect) < 0.05);
}

TEST_CASE("grid moments and temperature") {
  const VelocityGrid g(6.0, 24);
  const Field m = g.evaluate([](const Vec3& v) {
    return 2.0 * std::pow(2.0 * pi * 0.8, -1.5) * std::exp(-(v - Vec3(0.3, -0.2, 0.0)).squaredNorm() / 1.6);
  });
  const GridMoments gm = grid_moments(m, g);
  CHECK(gm.mass == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(gm.momentum.x() == doctest::Approx(0.6).epsilon(1e-8));
  CHECK(temperature(gm) == doctest::Approx(0.8).epsilon(1e-8));
}

TEST_CASE("discrete_equilibrium") {
  const VelocityGrid g(4.0, 12);
  const double eps = 3.0;
  const Field f = g.evaluate([](const Vec3& v) {
    return 0.12 * std::exp(-(v - Vec3(0.6, 0.0, 0.0)).squaredNorm()) + 0.1 * std::exp(-(v + Vec3(0.6, 0.1, 0.0)).squaredNorm());
  });
  const GridMoments target = grid_moments(f, g);
  const DistributionState m = discrete_equilibrium(target, eps, g);
  const GridMoments got = grid_moments(m.values, g);
  CHECK(got.mass == doctest::Approx(target.mass).epsilon(1e-13));
  CHECK((got.momentum - target.momentum).norm() < 1e-13);
  CHECK(got.energy == doctest::Approx(target.energy).epsilon(1e-13));
  CHECK(m.values.maxCoeff() < 1.0 / eps);

  // maximizes the entropy among states with the same discrete moments
  const double s_eq = entropy_S(m);
  CHECK(s_eq > entropy_S(DistributionState(g, f, eps)));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1e-3);
  for (int k = 0; k < 10; ++k) {
    Field d(f.size());
    for (auto& x : d) x = n(rng);
    const Field pert = m.values + conservation_correction(d * m.values, g, m.values * (1.0 - eps * m.values));
    if (pert.minCoeff() < 0.0 || pert.maxCoeff() > 1.0 / eps) continue;
    REQUIRE(entropy_S(DistributionState(g, pert, eps)) < s_eq);
  }
}
