#include "bfd/equilibria.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace bfd {

namespace {

constexpr double pi = std::numbers::pi;

struct RadialIntegrals {
  double i2 = 0.0, i4 = 0.0, j2 = 0.0, j4 = 0.0;
};

// I_k = int_0^inf x^k / (e^{x^2} + z) dx and J_k = int_0^inf x^k / (e^{x^2} + z)^2 dx.
RadialIntegrals radial_integrals(double z, bool with_derivatives) {
  using boost::math::quadrature::gauss_kronrod;
  const double knee = z > 1.0 ? std::sqrt(std::log(z)) : 0.0;
  const double upper = knee + 7.0;
  auto integrate = [&](auto&& fn) {
    double err = 0.0;
    double total = 0.0;
    if (knee > 0.0) {
      total += gauss_kronrod<double, 61>::integrate(fn, 0.0, knee, 15, 1e-12, &err);
      total += gauss_kronrod<double, 61>::integrate(fn, knee, upper, 15, 1e-12, &err);
    } else {
      total += gauss_kronrod<double, 61>::integrate(fn, 0.0, upper, 15, 1e-12, &err);
    }
    if (!std::isfinite(total)) throw Error("fd_moments: quadrature did not converge");
    return total;
  };
  RadialIntegrals r;
  r.i2 = integrate([z](double x) { return x * x / (std::exp(x * x) + z); });
  r.i4 = integrate([z](double x) { return x * x * x * x / (std::exp(x * x) + z); });
  if (with_derivatives) {
    r.j2 = integrate([z](double x) {
      const double d = std::exp(x * x) + z;
      return x * x / (d * d);
    });
    r.j4 = integrate([z](double x) {
      const double d = std::exp(x * x) + z;
      return x * x * x * x / (d * d);
    });
  }
  return r;
}

struct NewtonOutcome {
  double log_a, log_b;
  double mass_residual, energy_residual;
  int iterations;
};

std::optional<NewtonOutcome> newton_fd(double rho, double theta, double eps, double log_a,
                                       double log_b) {
  const double energy_target = 3.0 * rho * theta;
  auto residual = [&](double la, double lb, RadialIntegrals* out) {
    const double a = std::exp(la);
    const double b = std::exp(lb);
    const RadialIntegrals r = radial_integrals(eps * a, out != nullptr);
    if (out) *out = r;
    const double mass = 4.0 * pi * a * std::pow(b, -1.5) * r.i2;
    const double energy = 4.0 * pi * a * std::pow(b, -2.5) * r.i4;
    return Eigen::Vector2d(std::log(mass / rho), std::log(energy / energy_target));
  };

  RadialIntegrals ints;
  Eigen::Vector2d res = residual(log_a, log_b, &ints);
  for (int it = 0; it < 100; ++it) {
    if (!res.allFinite()) return std::nullopt;
    if (res.cwiseAbs().maxCoeff() <= 1e-14) {
      return NewtonOutcome{log_a, log_b, std::abs(std::expm1(res(0))),
                           std::abs(std::expm1(res(1))), it};
    }
    const double z = eps * std::exp(log_a);
    Eigen::Matrix2d jac;
    jac << 1.0 - z * ints.j2 / ints.i2, -1.5, 1.0 - z * ints.j4 / ints.i4, -2.5;
    Eigen::Vector2d delta = -jac.partialPivLu().solve(res);
    const double cap = 2.0;
    if (delta.cwiseAbs().maxCoeff() > cap) delta *= cap / delta.cwiseAbs().maxCoeff();

    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      RadialIntegrals trial_ints;
      const Eigen::Vector2d trial =
          residual(log_a + step * delta(0), log_b + step * delta(1), &trial_ints);
      if (trial.allFinite() && trial.norm() < res.norm()) {
        log_a += step * delta(0);
        log_b += step * delta(1);
        res = trial;
        ints = trial_ints;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (res.cwiseAbs().maxCoeff() <= 1e-12) {
        return NewtonOutcome{log_a, log_b, std::abs(std::expm1(res(0))),
                             std::abs(std::expm1(res(1))), it};
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

FdMoments fd_moments(double a, double b, double eps) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error("fd_moments: a and b must be positive and finite");
  }
  if (!(eps >= 0.0)) throw Error("fd_moments: eps must be non-negative");
  const RadialIntegrals r = radial_integrals(eps * a, false);
  return {4.0 * pi * a * std::pow(b, -1.5) * r.i2, 4.0 * pi * a * std::pow(b, -2.5) * r.i4};
}

double epsilon_sat(double rho, double theta) {
  if (!(rho > 0.0) || !(theta > 0.0)) throw Error("epsilon_sat: rho and theta must be positive");
  return 4.0 * pi * std::pow(5.0 * theta, 1.5) / (3.0 * rho);
}

FermiDiracParams solve_fd_params(double rho, const Vec3& u, double theta, double eps) {
  if (!(rho > 0.0) || !(theta > 0.0) || !std::isfinite(rho) || !std::isfinite(theta)) {
    throw Error("solve_fd_params: rho and theta must be positive and finite");
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw Error("solve_fd_params: eps must be >= 0");
  if (!u.allFinite()) throw Error("solve_fd_params: non-finite bulk velocity");
  const double sat = epsilon_sat(rho, theta);
  if (eps >= sat * (1.0 - 1e-6)) {
    throw Error("solve_fd_params: saturation threshold exceeded (eps = " + std::to_string(eps) +
                ", eps_sat = " + std::to_string(sat) + ")");
  }

  FermiDiracParams p;
  p.rho = rho;
  p.u = u;
  p.theta = theta;
  p.epsilon = eps;
  const double a0 = rho * std::pow(2.0 * pi * theta, -1.5);
  const double b0 = 0.5 / theta;
  if (eps == 0.0) {
    p.a = a0;
    p.b = b0;
    const FdMoments m = fd_moments(p.a, p.b, 0.0);
    p.mass_residual = std::abs(m.mass / rho - 1.0);
    p.energy_residual = std::abs(m.energy / (3.0 * rho * theta) - 1.0);
    return p;
  }

  std::optional<NewtonOutcome> sol = newton_fd(rho, theta, eps, std::log(a0), std::log(b0));
  if (!sol) {
    // Continuation in eps from the classical fit.
    double la = std::log(a0), lb = std::log(b0);
    const int stages = 64;
    for (int k = 1; k <= stages; ++k) {
      const double e = eps * static_cast<double>(k) / stages;
      sol = newton_fd(rho, theta, e, la, lb);
      if (!sol) throw Error("solve_fd_params: Newton stagnated");
      la = sol->log_a;
      lb = sol->log_b;
    }
  }
  p.a = std::exp(sol->log_a);
  p.b = std::exp(sol->log_b);
  p.iterations = sol->iterations;
  const FdMoments m = fd_moments(p.a, p.b, eps);
  p.mass_residual = std::abs(m.mass / rho - 1.0);
  p.energy_residual = std::abs(m.energy / (3.0 * rho * theta) - 1.0);
  if (p.mass_residual > 1e-10 || p.energy_residual > 1e-10) {
    throw Error("solve_fd_params: Newton stagnated (residuals " + std::to_string(p.mass_residual) +
                ", " + std::to_string(p.energy_residual) + ")");
  }
  return p;
}

DistributionState sample_equilibrium(const FermiDiracParams& params, const VelocityGrid& grid) {
  const double a = params.a;
  const double b = params.b;
  const double eps = params.epsilon;
  Field values = grid.evaluate([&](const Vec3& v) {
    const double m = a * std::exp(-b * (v - params.u).squaredNorm());
    return m / (1.0 + eps * m);
  });
  return DistributionState(grid, std::move(values), eps);
}

SaturatedState saturated_state(double rho, const Vec3& u, double eps, const VelocityGrid& grid) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error("saturated_state: eps must be positive");
  if (!(rho > 0.0)) throw Error("saturated_state: rho must be positive");
  const double radius = std::cbrt(3.0 * rho * eps / (4.0 * pi));
  if (u.cwiseAbs().maxCoeff() + radius > grid.half_width()) {
    throw Error("saturated_state: ball of radius " + std::to_string(radius) +
                " exceeds the grid box");
  }
  Field values = grid.evaluate(
      [&](const Vec3& v) { return (v - u).norm() <= radius ? 1.0 / eps : 0.0; });
  const double mass = integrate_grid(values, grid);
  return {DistributionState(grid, std::move(values), eps), radius, mass - rho};
}

GridMoments grid_moments(const Field& f, const VelocityGrid& grid) {
  if (static_cast<std::size_t>(f.size()) != grid.size()) throw Error("grid_moments: size mismatch");
  GridMoments m;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Vec3 v = grid.node(p);
    const double value = f(static_cast<Eigen::Index>(p));
    m.mass += value;
    m.momentum += value * v;
    m.energy += value * v.squaredNorm();
  }
  const double w = grid.cell_volume();
  m.mass *= w;
  m.momentum *= w;
  m.energy *= w;
  return m;
}

double temperature(const GridMoments& m) {
  if (!(m.mass > 0.0)) throw Error("temperature: mass must be positive");
  return (m.energy - m.momentum.squaredNorm() / m.mass) / (3.0 * m.mass);
}

DistributionState discrete_equilibrium(const GridMoments& target, double eps,
                                       const VelocityGrid& grid) {
  using Vec5 = Eigen::Matrix<double, 5, 1>;
  using Mat5 = Eigen::Matrix<double, 5, 5>;
  const double theta = temperature(target);
  const Vec3 u = target.momentum / target.mass;
  const FermiDiracParams start = solve_fd_params(target.mass, u, theta, eps);

  const double L = grid.half_width();
  const std::size_t n = grid.size();
  std::vector<Vec5> basis(n);
  for (std::size_t p = 0; p < n; ++p) {
    const Vec3 s = grid.node(p) / L;
    basis[p] << 1.0, s.x(), s.y(), s.z(), s.squaredNorm();
  }
  Vec5 goal;
  goal << target.mass, target.momentum.x() / L, target.momentum.y() / L,
      target.momentum.z() / L, target.energy / (L * L);

  Vec5 c;
  c << std::log(start.a) - start.b * u.squaredNorm(), 2.0 * start.b * u.x() * L,
      2.0 * start.b * u.y() * L, 2.0 * start.b * u.z() * L, -start.b * L * L;

  const double w = grid.cell_volume();
  Field values(static_cast<Eigen::Index>(n));
  auto evaluate = [&](const Vec5& coeff, Mat5* jac) {
    Vec5 moments = Vec5::Zero();
    if (jac) jac->setZero();
    for (std::size_t p = 0; p < n; ++p) {
      const double f = 1.0 / (std::exp(-coeff.dot(basis[p])) + eps);
      values(static_cast<Eigen::Index>(p)) = f;
      moments += w * f * basis[p];
      if (jac) jac->noalias() += w * f * (1.0 - eps * f) * basis[p] * basis[p].transpose();
    }
    return Vec5(moments - goal);
  };

  Mat5 jac;
  Vec5 res = evaluate(c, &jac);
  const double scale = goal.cwiseAbs().maxCoeff();
  for (int it = 0; it < 60 && res.cwiseAbs().maxCoeff() > 1e-15 * scale; ++it) {
    const Vec5 delta = -jac.ldlt().solve(res);
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      Mat5 trial_jac;
      const Vec5 trial = evaluate(c + step * delta, &trial_jac);
      if (trial.allFinite() && trial.norm() < res.norm()) {
        c += step * delta;
        res = trial;
        jac = trial_jac;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  evaluate(c, nullptr);
  if (!(res.cwiseAbs().maxCoeff() <= 1e-11 * scale)) {
    throw Error("discrete_equilibrium: moment matching did not converge");
  }
  return DistributionState(grid, values, eps);
}

}  // namespace bfd
