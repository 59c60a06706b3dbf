#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bfd/kernel.hpp"

using namespace bfd;
using std::numbers::pi;

namespace {

// Composite Simpson on [lo, hi] with n (even) panels.
template <typename Fn>
double simpson(Fn&& fn, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = fn(lo) + fn(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * fn(lo + i * h);
  return s * h / 3.0;
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

CollisionKernelSpec power_spec() {
  CollisionKernelSpec s;
  s.nu = 0.5;
  s.angular.kind = AngularModel::Kind::truncated_power;
  s.angular.b0 = 0.3;
  s.angular.C = 1.0;
  s.angular.theta_cut = 0.2;
  return s;
}

}  // namespace

TEST_CASE("angular factor") {
  CollisionKernelSpec s;
  s.angular.b0 = 0.7;
  for (double c : {-1.0, -0.3, 0.0, 0.9, 1.0}) CHECK(angular_factor(s, c) == 0.7);

  const CollisionKernelSpec p = power_spec();
  CHECK(angular_factor(p, 0.0) == doctest::Approx(0.3 + std::pow(pi / 2, -3.0)).epsilon(1e-14));
  CHECK(angular_factor(p, 1.0) == doctest::Approx(0.3 + std::pow(0.2, -3.0)).epsilon(1e-14));
  CHECK(angular_factor(p, std::cos(0.1)) == doctest::Approx(angular_factor(p, 1.0)).epsilon(1e-14));
  for (int k = 0; k <= 100; ++k) REQUIRE(angular_factor(p, std::cos(pi * k / 100.0)) >= p.angular.b0);
  CHECK_THROWS_AS(angular_factor(s, 1.5), Error);
}

TEST_CASE("angular norms") {
  CollisionKernelSpec s;
  s.angular.b0 = 1.0;
  CHECK(angular_l1_norm(s) == doctest::Approx(4.0 * pi).epsilon(1e-12));
  CHECK(angular_sin3_half_integral(s) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));

  const CollisionKernelSpec p = power_spec();
  auto b = [&](double t) { return 0.3 + std::pow(std::max(t, 0.2), -3.0); };
  const double l1 = 2.0 * pi * (simpson([&](double t) { return b(t) * std::sin(t); }, 0.0, 0.2, 2000) +
                                simpson([&](double t) { return b(t) * std::sin(t); }, 0.2, pi, 200000));
  CHECK(angular_l1_norm(p) == doctest::Approx(l1).epsilon(1e-8));
  const double s3 = 2.0 * pi *
                    (simpson([&](double t) { return b(t) * std::pow(std::sin(t), 3); }, 0.0, 0.2, 2000) +
                     simpson([&](double t) { return b(t) * std::pow(std::sin(t), 3); }, 0.2, pi / 2, 200000));
  CHECK(angular_sin3_half_integral(p) == doctest::Approx(s3).epsilon(1e-8));
}

TEST_CASE("kinetic factor") {
  CollisionKernelSpec s;
  s.gamma = -1.0;
  CHECK(kinetic_factor(s, 2.0) == 0.5);
  s.gamma = -0.5;
  CHECK(kinetic_factor(s, 4.0) == 0.5);
  CHECK(kinetic_factor(s, 0.0) == 0.0);
}

TEST_CASE("validation") {
  CollisionKernelSpec s;
  CHECK_NOTHROW(s.validate());
  s.gamma = -2.1;
  s.nu = 0.9;
  CHECK_THROWS_AS(s.validate(), Error);
  s.gamma = -1.0;
  s.nu = 0.4;
  CHECK_THROWS_AS(s.validate(), Error);
  s.nu = 0.75;
  CHECK_NOTHROW(s.validate());
  s.angular.b0 = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  const CollisionKernelSpec scaled = scaled_kernel(power_spec(), 4.0);
  CHECK(scaled.angular.b0 == doctest::Approx(1.2));
  CHECK(scaled.angular.C == 4.0);
}

TEST_CASE("sigma representation") {
  auto [a, b] = post_collision_sigma<double>(Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0));
  CHECK((a - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK((b - Vec3(0, -1, 0)).norm() < 1e-15);

  const Vec3 v(0.3, -1.2, 2.0), w(-0.5, 0.7, 0.1);
  auto [c, d] = post_collision_sigma<double>(v, w, (v - w).normalized());
  CHECK((c - v).norm() < 1e-14);
  CHECK((d - w).norm() < 1e-14);

  auto [e, f] = post_collision_sigma<double>(Vec3(0, 0, 0), Vec3(0, 0, 2), Vec3(1, 0, 0));
  CHECK((e - Vec3(1, 0, 1)).norm() < 1e-15);
  CHECK((f - Vec3(-1, 0, 1)).norm() < 1e-15);
  CHECK(e.squaredNorm() + f.squaredNorm() == doctest::Approx(4.0));

  CHECK_THROWS_AS(post_collision_sigma<double>(v, w, Vec3(1, 1, 0)), Error);
}

TEST_CASE("omega representation and conversion") {
  auto [a, b] = post_collision_omega<double>(Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(1, 0, 0));
  CHECK((a - Vec3(-1, 0, 0)).norm() < 1e-15);
  CHECK((b - Vec3(1, 0, 0)).norm() < 1e-15);
  auto [c, d] = post_collision_omega<double>(Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 0, 1));
  CHECK((c - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((d - Vec3(-1, 0, 0)).norm() < 1e-15);

  const Vec3 s = sigma_from_omega<double>(Vec3(1, 0, 0), Vec3(1, 0, 0));
  CHECK((s - Vec3(-1, 0, 0)).norm() < 1e-15);
  auto [e, f] = post_collision_sigma<double>(Vec3(1, 0, 0), Vec3(-1, 0, 0), s);
  CHECK((e - a).norm() < 1e-15);
  CHECK((f - b).norm() < 1e-15);

  CHECK((sigma_from_omega<double>(Vec3(0, 0, 1), Vec3(1, 0, 0)) - Vec3(0, 0, 1)).norm() < 1e-15);
  const Vec3 n(1, 0, 0), om(1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0);
  const Vec3 t = sigma_from_omega<double>(n, om);
  CHECK((t - Vec3(0, -1, 0)).norm() < 1e-15);
  CHECK(t.norm() == doctest::Approx(1.0));
}

TEST_CASE("collision invariants on random samples") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 v(n(rng), n(rng), n(rng)), w(n(rng), n(rng), n(rng));
    const double scale = v.squaredNorm() + w.squaredNorm() + 1.0;
    for (bool sigma : {true, false}) {
      const auto [a, b] = sigma ? post_collision_sigma<double>(v, w, random_unit(rng))
                                : post_collision_omega<double>(v, w, random_unit(rng));
      REQUIRE(((a + b) - (v + w)).norm() <= 1e-13 * std::sqrt(scale));
      REQUIRE(std::abs(a.squaredNorm() + b.squaredNorm() - v.squaredNorm() - w.squaredNorm()) <= 1e-13 * scale);
    }
  }
}

TEST_CASE("templates accept other scalars") {
  using V = Vector3<long double>;
  auto [a, b] = post_collision_sigma<long double>(V(1, 0, 0), V(-1, 0, 0), V(0, 1, 0));
  CHECK(static_cast<double>(a.y()) == 1.0);
  CHECK(static_cast<double>(b.y()) == -1.0);
}
