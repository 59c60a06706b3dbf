#include "bfd/functionals.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "bfd/collision.hpp"

namespace bfd {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void require_same_grid(const DistributionState& f, const DistributionState& g, const char* what) {
  if (!(f.grid == g.grid)) throw Error(std::string(what) + ": mismatched grids");
  if (f.epsilon != g.epsilon) throw Error(std::string(what) + ": mismatched eps");
}

}  // namespace

MomentReport moment(const Field& f, const VelocityGrid& grid, double s) {
  if (static_cast<std::size_t>(f.size()) != grid.size()) throw Error("moment: size mismatch");
  MomentReport r;
  r.s = s;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double weight = std::pow(japanese_bracket(grid.node(p)), s);
    const double value = f(static_cast<Eigen::Index>(p));
    r.m += value * weight;
    r.M += value * value * weight;
  }
  r.m *= grid.cell_volume();
  r.M *= grid.cell_volume();
  r.E = r.m + 0.5 * r.M;
  return r;
}

double entropy_S(const DistributionState& f) {
  if (f.epsilon == 0.0) return -boltzmann_entropy(f.values, f.grid);
  f.validate(1e-12);
  const double eps = f.epsilon;
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    const double x = std::clamp(eps * f.values(i), 0.0, 1.0);
    total -= xlogx(1.0 - x) + xlogx(x);
  }
  return total * f.grid.cell_volume() / eps;
}

double boltzmann_entropy(const Field& f, const VelocityGrid& grid) {
  if (static_cast<std::size_t>(f.size()) != grid.size()) {
    throw Error("boltzmann_entropy: size mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f(i) < 0.0) throw Error("boltzmann_entropy: negative value at node " + std::to_string(i));
    total += xlogx(f(i));
  }
  return total * grid.cell_volume();
}

double relative_entropy(const DistributionState& f, const DistributionState& g) {
  require_same_grid(f, g, "relative_entropy");
  return entropy_S(g) - entropy_S(f);
}

double entropy_production(const DistributionState& f, const CollisionKernelSpec& spec,
                          const SphereQuadrature& sphere, double eta) {
  spec.validate();
  f.validate();
  if (!std::isfinite(eta)) throw Error("entropy_production: eta must be finite");
  const double d = detail::pair_sweep(f, spec, sphere, {true, true, eta}).entropy_production;
  if (!std::isfinite(d)) throw Error("entropy_production: non-finite result");
  return d;
}

CsiszarKullback csiszar_kullback_gap(const DistributionState& f, const DistributionState& reference,
                                     double moment_tolerance) {
  require_same_grid(f, reference, "csiszar_kullback_gap");
  const GridMoments mf = grid_moments(f.values, f.grid);
  const GridMoments mr = grid_moments(reference.values, reference.grid);
  if (std::abs(mf.mass - mr.mass) > moment_tolerance * std::abs(mr.mass) ||
      std::abs(mf.energy - mr.energy) > moment_tolerance * std::abs(mr.energy)) {
    throw Error("csiszar_kullback_gap: moments of f and the reference do not match");
  }
  CsiszarKullback out;
  double l1 = 0.0;
  double l12 = 0.0;
  for (std::size_t p = 0; p < f.grid.size(); ++p) {
    const auto i = static_cast<Eigen::Index>(p);
    const double diff = std::abs(f.values(i) - reference.values(i));
    l1 += diff;
    l12 += diff * (1.0 + f.grid.node(p).squaredNorm());
  }
  const double w = f.grid.cell_volume();
  out.lhs = (l1 * w) * (l1 * w);
  out.mid = 2.0 * mf.mass * relative_entropy(f, reference);
  out.rhs = l12 * w;
  return out;
}

CsiszarKullback csiszar_kullback_gap(const DistributionState& f, const FermiDiracParams& params,
                                     double moment_tolerance) {
  if (params.epsilon != f.epsilon) throw Error("csiszar_kullback_gap: mismatched eps");
  return csiszar_kullback_gap(f, sample_equilibrium(params, f.grid), moment_tolerance);
}

Field level_set_positive(const Field& f, double K) {
  if (!(K >= 0.0)) throw Error("level_set_positive: K must be non-negative");
  return (f - K).max(0.0);
}

double sobolev_seminorm_sq(const Field& g, const VelocityGrid& grid, double nu) {
  if (static_cast<std::size_t>(g.size()) != grid.size()) {
    throw Error("sobolev_seminorm_sq: size mismatch");
  }
  const int n = grid.points_per_axis();
  using Complex = std::complex<double>;
  std::vector<Complex> data(g.data(), g.data() + g.size());
  Eigen::FFT<double> fft;
  std::vector<Complex> line_in(n), line_out(n);

  // Separable transform along k, j, i.
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t stride = axis == 0 ? 1 : axis == 1 ? n : static_cast<std::size_t>(n) * n;
    for (std::size_t base = 0; base < data.size(); ++base) {
      if ((base / stride) % n != 0) continue;
      for (int m = 0; m < n; ++m) line_in[m] = data[base + m * stride];
      fft.fwd(line_out, line_in);
      for (int m = 0; m < n; ++m) data[base + m * stride] = line_out[m];
    }
  }

  const double dxi = std::numbers::pi / grid.half_width();
  auto wave = [&](int k) { return dxi * (k < n / 2 ? k : k - n); };
  double total = 0.0;
  for (std::size_t p = 0; p < data.size(); ++p) {
    const auto [i, j, k] = grid.unflatten(p);
    const double xi2 = wave(i) * wave(i) + wave(j) * wave(j) + wave(k) * wave(k);
    const double multiplier = nu == 0.0 ? 1.0 : std::pow(xi2, nu);
    total += std::norm(data[p]) * multiplier;
  }
  return total * grid.cell_volume() / static_cast<double>(data.size());
}

double level_energy_functional(const std::vector<Snapshot>& trajectory, const VelocityGrid& grid,
                               double level, double t1, double t2,
                               const LevelEnergyOptions& options) {
  if (!(t1 < t2)) throw Error("level_energy_functional: need T1 < T2");
  if (!(level >= 0.0)) throw Error("level_energy_functional: level must be non-negative");
  const Field weight = grid.evaluate(
      [&](const Vec3& v) { return std::pow(japanese_bracket(v), 0.5 * options.gamma); });

  double best = 0.0;
  double integral = 0.0;
  double prev_t = 0.0;
  double prev_density = 0.0;
  bool any = false;
  for (const Snapshot& snap : trajectory) {
    if (snap.t < t1 || snap.t > t2) continue;
    const Field plus = level_set_positive(snap.values, level);
    const Field weighted = weight * plus;
    const double density = sobolev_seminorm_sq(weighted, grid, options.nu) +
                           integrate_grid(weighted.square(), grid);
    if (any) integral += 0.5 * (snap.t - prev_t) * (density + prev_density);
    const double value = 0.5 * integrate_grid(plus.square(), grid) + 0.5 * options.c0 * integral;
    best = any ? std::max(best, value) : value;
    prev_t = snap.t;
    prev_density = density;
    any = true;
  }
  if (!any) throw Error("level_energy_functional: no recorded times in [T1, T2]");
  return best;
}

double coercivity_coefficient(const DistributionState& f, double theta) {
  if (!(theta > 0.0)) throw Error("coercivity_coefficient: theta must be positive");
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
  for (std::size_t p = 0; p < f.grid.size(); ++p) {
    const Vec3 v = f.grid.node(p);
    second.noalias() += f.values(static_cast<Eigen::Index>(p)) * v * v.transpose();
  }
  second *= f.grid.cell_volume();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(second, Eigen::EigenvaluesOnly);
  const double kappa0 = 1.0 - f.epsilon * f.values.maxCoeff();
  return 2.0 * std::numbers::pi / 7.0 * std::pow(kappa0, 5) * std::min(1.0, theta) *
         eig.eigenvalues()(0);
}

}  // namespace bfd
