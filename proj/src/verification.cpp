#include "bfd/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "bfd/collision.hpp"
#include "bfd/diagnostics.hpp"
#include "bfd/equilibria.hpp"
#include "bfd/runner.hpp"

namespace bfd {

namespace {

constexpr double pi = std::numbers::pi;

std::string sci(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  return buf;
}

std::string fixed(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

class Checks {
 public:
  void require(bool ok, const std::string& name, const std::string& what) {
    if (!detail_.empty()) detail_ += "; ";
    detail_ += what;
    if (!ok) {
      failed_.push_back(name);
      detail_ += " [fail]";
    }
  }
  void note(const std::string& what) {
    if (!detail_.empty()) detail_ += "; ";
    detail_ += what;
  }
  void finish(CriterionResult& r) const {
    r.passed = failed_.empty();
    r.failed_checks = failed_;
    r.detail = detail_;
  }

 private:
  std::vector<std::string> failed_;
  std::string detail_;
};

Field gaussian_blend(const VelocityGrid& grid, double theta, const Vec3& u1, const Vec3& u2) {
  const double norm = std::pow(2.0 * pi * theta, -1.5);
  return grid.evaluate([&](const Vec3& v) {
    return 0.5 * norm * (std::exp(-(v - u1).squaredNorm() / (2.0 * theta)) +
                         std::exp(-(v - u2).squaredNorm() / (2.0 * theta)));
  });
}

// Defect scales: int |Q|, int |Q| |v|, int |Q| |v|^2.
ConservationDefects defect_scales(const Field& q, const VelocityGrid& grid) {
  const Field speed = grid.evaluate([](const Vec3& v) { return v.norm(); });
  const double w = grid.cell_volume();
  ConservationDefects s;
  s.mass = q.abs().sum() * w;
  const double p = (q.abs() * speed).sum() * w;
  s.momentum = Vec3::Constant(p);
  s.energy = (q.abs() * speed.square()).sum() * w;
  return s;
}

double relative_defect(const ConservationDefects& d, const ConservationDefects& scale) {
  return std::max({std::abs(d.mass) / scale.mass, d.momentum.norm() / scale.momentum.x(),
                   std::abs(d.energy) / scale.energy});
}

void scaling_identity(const VerifyOptions& opt, Checks& c) {
  const VelocityGrid grid(4.0, 8);
  const SphereQuadrature sphere = build_sphere_quadrature(5);
  CollisionKernelSpec spec;
  std::mt19937_64 rng(opt.seed);
  for (double eps : {0.25, 1.0}) {
    std::uniform_real_distribution<double> unit(0.0, 0.95 / eps);
    Field values(static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = unit(rng);
    const double dev = scaling_identity_check(DistributionState(grid, values, eps), spec, sphere);
    c.require(dev <= 1e-12, "scaling_eps_" + fixed(eps, 2),
              "eps=" + fixed(eps, 2) + " max rel dev " + sci(dev));
  }
}

void conservation(const VerifyOptions& opt, Checks& c) {
  const double eps = opt.classical ? 0.0 : 3.0;
  const SphereQuadrature sphere = build_sphere_quadrature(7);
  CollisionKernelSpec spec;
  ConservationDefects raw[2];
  const int sizes[2] = {12, 24};
  for (int k = 0; k < 2; ++k) {
    const VelocityGrid grid(5.0, sizes[k]);
    const DistributionState f(
        grid, gaussian_blend(grid, 1.0, Vec3(1.0, 0.0, 0.0), Vec3(-1.0, 0.3, 0.0)), eps);
    const CollisionResult q = collision_operator(f, spec, sphere, true);
    raw[k] = q.defects;
    const ConservationDefects after = conservation_defects(q.values, grid);
    const double rel = relative_defect(after, defect_scales(q.values, grid));
    c.require(rel <= 1e-12, "corrected_N" + std::to_string(sizes[k]),
              "N=" + std::to_string(sizes[k]) + " corrected defect " + sci(rel));
  }
  const double rm = std::abs(raw[0].mass) / std::abs(raw[1].mass);
  const double rp = raw[0].momentum.norm() / raw[1].momentum.norm();
  const double re = std::abs(raw[0].energy) / std::abs(raw[1].energy);
  c.require(std::min({rm, rp, re}) >= 3.5, "uncorrected_ratio",
            "uncorrected N12/N24 ratios mass " + fixed(rm, 2) + " momentum " + fixed(rp, 2) +
                " energy " + fixed(re, 2));
}

void annihilation(const VerifyOptions& opt, Checks& c) {
  const SphereQuadrature sphere = build_sphere_quadrature(3);
  CollisionKernelSpec spec;
  std::vector<double> fractions{0.0};
  if (!opt.classical) fractions.push_back(0.3);
  for (double frac : fractions) {
    const double eps = frac * epsilon_sat(1.0, 1.0);
    const FermiDiracParams p = solve_fd_params(1.0, Vec3::Zero(), 1.0, eps);
    double norms[2];
    for (int k = 0; k < 2; ++k) {
      const VelocityGrid grid(6.0, k == 0 ? 12 : 24);
      const Field q = collision_operator(sample_equilibrium(p, grid), spec, sphere, false).values;
      norms[k] = q.abs().sum() * grid.cell_volume();
    }
    const double ratio = norms[0] / norms[1];
    c.require(ratio >= 3.0, "ratio_" + fixed(frac, 1),
              "eps=" + fixed(frac, 1) + " eps_sat |Q(M)|_1 " + sci(norms[0], 2) + " -> " +
                  sci(norms[1], 2) + " ratio " + fixed(ratio, 2));
  }
}

void equilibrium_solver(Checks& c) {
  double worst_ab = 0.0, worst_res = 0.0;
  for (auto [rho, theta] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.7}, std::pair{0.5, 1.8}}) {
    const FermiDiracParams p = solve_fd_params(rho, Vec3::Zero(), theta, 1e-8);
    worst_ab = std::max({worst_ab, std::abs(p.a - rho * std::pow(2.0 * pi * theta, -1.5)),
                         std::abs(p.b - 0.5 / theta)});
    worst_res = std::max({worst_res, p.mass_residual, p.energy_residual});
  }
  c.require(worst_ab <= 1e-6, "classical_limit", "|(a,b) - Maxwellian| " + sci(worst_ab));
  c.require(worst_res <= 1e-10, "residuals", "moment residual " + sci(worst_res));
  double worst_mid = 0.0;
  for (double frac : {0.3, 0.9}) {
    const FermiDiracParams p = solve_fd_params(1.0, Vec3::Zero(), 1.0, frac * epsilon_sat(1.0, 1.0));
    worst_mid = std::max({worst_mid, p.mass_residual, p.energy_residual});
  }
  c.require(worst_mid <= 1e-10, "accept_0.9", "0.9 eps_sat accepted, residual " + sci(worst_mid));
  bool rejected = false;
  try {
    solve_fd_params(1.0, Vec3::Zero(), 1.0, 1.01 * epsilon_sat(1.0, 1.0));
  } catch (const Error&) {
    rejected = true;
  }
  c.require(rejected, "reject_1.01", rejected ? "1.01 eps_sat rejected" : "1.01 eps_sat accepted");
}

void cancellation(Checks& c) {
  const VelocityGrid grid(5.0, 24);
  const DistributionState f(
      grid, grid.evaluate([](const Vec3& v) { return std::pow(2.0 * pi, -1.5) * std::exp(-0.5 * v.squaredNorm()); }),
      0.0);
  CollisionKernelSpec spec;
  spec.gamma = -1.0;
  spec.nu = 0.75;
  CancellationSetup setup;
  setup.probe = Vec3(0.3, 0.2, -0.1);
  setup.lambda = 1.0;
  setup.radial_points = 48;
  setup.sphere_order = 21;
  for (auto [id, name] : {std::pair{CancellationIdentity::gain_point, "gain point"},
                          std::pair{CancellationIdentity::partner_point, "partner point"}}) {
    const double direct = cancellation_oracle(f, spec, setup, id, CancellationSide::direct);
    const double reduced = cancellation_oracle(f, spec, setup, id, CancellationSide::reduced);
    const double rel = std::abs(direct - reduced) / std::abs(reduced);
    c.require(rel <= 1e-2, name, std::string(name) + " direct " + fixed(direct, 5) + " reduced " +
                                     fixed(reduced, 5) + " rel " + sci(rel, 2));
  }
}

RunConfig mixture_config(bool classical) {
  RunConfig cfg;
  cfg.L = 4.5;
  cfg.N = 16;
  cfg.kernel.gamma = -0.5;
  cfg.kernel.nu = 0.75;
  cfg.kernel.angular.b0 = 0.1;
  cfg.sphere_order = 5;
  cfg.initial.family = InitialDatum::Family::two_maxwellian_mixture;
  cfg.initial.separation = 1.0;
  cfg.initial.component_theta = 0.5;
  cfg.initial.weight = 0.5;
  cfg.epsilon_fraction = classical ? 0.0 : 0.2;
  cfg.t_end = 5.0;
  cfg.output_interval = 0.5;
  cfg.s_values = {4.0};
  return cfg;
}

void entropy_run(const RunOutcome& out, double h, Checks& c) {
  const RunChecks& k = out.checks;
  c.require(k.min_entropy_step >= -1e-10, "entropy_monotone",
            "min per-step dS/|S| " + sci(k.min_entropy_step, 2));
  c.require(k.min_scaled_production >= -1e-12, "production_sign",
            "min D/scale " + sci(k.min_scaled_production, 2));
  c.require(k.entropy_identity_residual <= 1e-3, "entropy_identity",
            "|dS - int D|/|dS| " + sci(k.entropy_identity_residual, 2) + " (dS " +
                sci(k.entropy_change) + ", int D " + sci(k.entropy_production_integral) + ")");
  double max_dt = 0.0;
  for (const StepLog& s : out.series.steps) max_dt = std::max(max_dt, s.dt);
  const double gap = std::abs(k.entropy_change - k.entropy_production_integral);
  const double tol = std::max(1e-3 * std::abs(k.entropy_change), 10.0 * h * h + 10.0 * max_dt * max_dt);
  c.require(gap <= tol, "entropy_identity_grid_tolerance",
            "gap " + sci(gap, 2) + " vs max(1e-3 |dS|, 10h^2 + 10dt^2) " + sci(tol, 2));
}

void relaxation_run(const RunOutcome& out, Checks& c) {
  const RunChecks& k = out.checks;
  c.require(k.h_rel_strictly_decreasing, "h_rel_decreasing",
            std::string("H_rel strictly decreasing: ") + (k.h_rel_strictly_decreasing ? "yes" : "no") +
                " (" + sci(out.series.records.front().H_rel, 2) + " -> " +
                sci(out.series.records.back().H_rel, 2) + ")");
  c.require(k.min_ck_margin >= -1e-10, "csiszar_kullback",
            "min (mid - lhs)/scale " + sci(k.min_ck_margin, 2));
  std::vector<double> t, h;
  for (const Record& r : out.series.records) {
    t.push_back(r.t);
    h.push_back(r.H_rel);
  }
  const DecayFit fit = decay_fit(t, h, 0.0, out.series.records.back().t, 30.0, out.series.gamma);
  c.require(fit.exponent > 0.0 && std::isfinite(fit.residual), "decay_fit",
            "fit p " + fixed(fit.exponent, 3) + " residual " + sci(fit.residual, 2));
  c.require(k.conservation_drift <= 1e-10, "conservation_drift",
            "conservation drift " + sci(k.conservation_drift, 2));
}

void moment_monitor(const RunOutcome& out, const RunConfig& cfg, Checks& c) {
  std::vector<double> t, m, mg;
  for (const Record& r : out.series.records) {
    t.push_back(r.t);
    m.push_back(r.m_s[0]);
    mg.push_back(r.m_s_gamma[0]);
  }
  const VelocityGrid grid(cfg.L, cfg.N);
  const DistributionState f0 = build_initial_state(cfg.initial, grid, out.epsilon, cfg.seed);
  const MomentMonitorReport rep = moment_inequality_monitor(
      t, m, mg, cfg.kernel,
      {4.0, moment(f0.values, grid, 0.0).m, moment(f0.values, grid, 2.0).m, cfg.c1_prime});
  double excess = -std::numeric_limits<double>::infinity();
  double integral = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    integral += 0.5 * (t[i] - t[i - 1]) * (mg[i] + mg[i - 1]);
    excess = std::max(excess, m[i] + 0.5 * rep.c_s * integral - m.front());
  }
  c.require(rep.min_margin >= 0.0, "margin",
            "s=4 min margin " + sci(rep.min_margin, 3) + " (c_s " + sci(rep.c_s, 3) + ", C_s " +
                sci(rep.C_s, 3) + "); max of m_s(t) + c_s/2 int m_{s+gamma} - m_s(0) " +
                sci(excess, 3));
  CollisionKernelSpec unit;
  unit.angular.b0 = 1.0;
  const double c4 = moment_production_constant(unit, 4.0);
  c.require(std::abs(c4 - pi / 48.0) <= 1e-12, "c4_constant",
            "c'_4(b=1) - pi/48 = " + sci(c4 - pi / 48.0, 2));
}

void non_saturation(Checks& c) {
  RunConfig cfg;
  cfg.L = 4.0;
  cfg.N = 12;
  cfg.kernel.angular.b0 = 0.1;
  cfg.sphere_order = 5;
  cfg.initial.family = InitialDatum::Family::perturbed_equilibrium;
  cfg.initial.theta = 0.5;
  cfg.t_end = 5.0;
  cfg.output_interval = 0.25;
  const SweepOutcome out = sweep(cfg, {0.0, 0.1, 0.3, 0.5}, "");
  double min_kappa = 1.0;
  for (const SweepRow& row : out.report.rows) {
    if (row.epsilon > 0.0) min_kappa = std::min(min_kappa, row.kappa0);
  }
  double pauli = 0.0;
  for (const RunOutcome& m : out.members) pauli = std::max(pauli, m.checks.max_pauli_excess);
  c.require(min_kappa > 0.0, "kappa0", "min kappa0 " + fixed(min_kappa, 4));
  c.require(out.report.pauli_respected && pauli <= 1e-12, "pauli",
            "max excess over 1/eps " + sci(pauli, 2));
  c.require(std::isfinite(out.report.uniform_linf_bound), "uniform_bound",
            "sup max f " + fixed(out.report.uniform_linf_bound, 5));
  c.require(out.report.no_monotone_growth, "no_growth",
            std::string("sustained growth: ") + (out.report.no_monotone_growth ? "none" : "detected"));
  std::size_t flagged = 0;
  for (const RunOutcome& m : out.members) flagged += m.checks.violations.empty() ? 0 : 1;
  if (flagged) c.note(std::to_string(flagged) + " member(s) with run-invariant warnings");
}

void picard(const VerifyOptions& opt, Checks& c) {
  const VelocityGrid grid(4.0, 8);
  const SphereQuadrature sphere = build_sphere_quadrature(5);
  CollisionKernelSpec spec;
  InitialDatum datum;
  datum.family = InitialDatum::Family::two_maxwellian_mixture;
  datum.component_theta = 0.5;
  const DatumMoments dm = datum_moments(datum, 0.0);
  const double eps = opt.classical ? 0.0 : 0.2 * epsilon_sat(dm.rho, dm.theta);
  const DistributionState f_in = build_initial_state(datum, grid, eps, opt.seed);
  const Field weight = grid.evaluate([](const Vec3& v) { return 1.0 + v.squaredNorm(); });

  double err[2], first_ratio[2], worst_ratio = 0.0;
  const double deltas[2] = {0.05, 0.025};
  bool converged = true;
  for (int k = 0; k < 2; ++k) {
    const PicardResult p = picard_solve(f_in, deltas[k], 40, spec, sphere, 8);
    converged = converged && p.converged;
    DistributionState x = f_in;
    StepControl ctl;
    ctl.dt = deltas[k] / 8.0;
    for (int s = 0; s < 8; ++s) x = step(x, spec, sphere, ctl);
    err[k] = ((p.trajectory.values.back() - x.values).abs() * weight).sum() * grid.cell_volume();
    first_ratio[k] = p.ratios.empty() ? 0.0 : p.ratios.front();
    for (double r : p.ratios) worst_ratio = std::max(worst_ratio, r);
  }
  const double err_ratio = err[0] / err[1];
  const double contraction = first_ratio[0] / first_ratio[1];
  c.require(converged, "converged", converged ? "both converged" : "not converged");
  c.require(err_ratio >= 3.5, "error_ratio",
            "|J - RK2|_{L1_2} " + sci(err[0], 2) + " -> " + sci(err[1], 2) + " ratio " + fixed(err_ratio, 2));
  c.require(worst_ratio < 1.0, "contraction", "max contraction ratio " + fixed(worst_ratio, 3));
  c.require(contraction >= 1.5 && contraction <= 2.7, "proportional",
            "ratio(d)/ratio(d/2) " + fixed(contraction, 2));
}

void exponents(Checks& c) {
  const double p = expected_decay_exponent(30.0, -0.5).value;
  const double m = moment_envelope_exponent(0.75);
  c.require(std::abs(p - 1.9) <= 1e-14, "decay", "decay exponent(30, -0.5) = " + fixed(p, 15));
  c.require(std::abs(m + 2.0) <= 1e-14, "envelope", "envelope exponent(0.75) = " + fixed(m, 15));
}

bool wanted(const VerifyOptions& opt, int id) {
  return opt.criteria.empty() || std::find(opt.criteria.begin(), opt.criteria.end(), id) != opt.criteria.end();
}

}  // namespace

std::vector<CriterionResult> run_verification(
    const VerifyOptions& options, const std::function<void(const CriterionResult&)>& on_result) {
  struct FaultGuard {
    explicit FaultGuard(bool on) { testing::set_projection_fault(on); }
    ~FaultGuard() { testing::set_projection_fault(false); }
  } guard(options.inject_projection_fault);

  const char* names[12] = {"",
                           "scaling identity",
                           "conservation",
                           "equilibrium annihilation",
                           "equilibrium solver",
                           "cancellation oracle",
                           "entropy identity",
                           "relaxation",
                           "non-saturation sweep",
                           "moment monitor",
                           "Picard vs RK2",
                           "exponent formulas"};

  std::vector<CriterionResult> results;
  std::optional<RunOutcome> mixture;
  const RunConfig mix_cfg = mixture_config(options.classical);
  auto mixture_run = [&]() -> const RunOutcome& {
    if (!mixture) mixture = run(mix_cfg, "");
    return *mixture;
  };

  for (int id = 1; id <= 11; ++id) {
    if (!wanted(options, id)) continue;
    CriterionResult r;
    r.id = id;
    r.name = names[id];
    if (options.classical && (id == 1 || id == 8)) {
      r.skipped = true;
      r.passed = true;
      r.detail = "needs eps > 0";
      results.push_back(r);
      if (on_result) on_result(r);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Checks c;
    try {
      switch (id) {
        case 1: scaling_identity(options, c); break;
        case 2: conservation(options, c); break;
        case 3: annihilation(options, c); break;
        case 4: equilibrium_solver(c); break;
        case 5: cancellation(c); break;
        case 6: entropy_run(mixture_run(), VelocityGrid(mix_cfg.L, mix_cfg.N).spacing(), c); break;
        case 7: relaxation_run(mixture_run(), c); break;
        case 8: non_saturation(c); break;
        case 9: moment_monitor(mixture_run(), mix_cfg, c); break;
        case 10: picard(options, c); break;
        case 11: exponents(c); break;
      }
    } catch (const std::exception& e) {
      c.require(false, "exception", std::string("error: ") + e.what());
    }
    c.finish(r);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(r);
    if (on_result) on_result(r);
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream out;
  out << (r.skipped ? "SKIP" : r.passed ? "PASS" : "FAIL") << "  " << (r.id < 10 ? " " : "") << r.id
      << "  " << r.name << "  (" << fixed(r.seconds, 1) << " s)  " << r.detail;
  return out.str();
}

}  // namespace bfd
