#include "bfd/runner.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include <omp.h>

#include "bfd/equilibria.hpp"
#include "bfd/io.hpp"
#include "json.hpp"

namespace bfd {

namespace {

using json = nlohmann::ordered_json;

json fit_json(const DecayFit& fit) {
  return {{"amplitude", fit.amplitude},       {"exponent", fit.exponent},
          {"t_a", fit.t_a},                   {"t_b", fit.t_b},
          {"residual", fit.residual},         {"samples", fit.samples},
          {"paper_exponent", fit.paper_exponent},
          {"paper_hypothesis_ok", fit.paper_hypothesis_ok}};
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

void set_thread_count(int threads) {
  if (threads < 0) throw Error("threads must be >= 0");
  if (threads > 0) omp_set_num_threads(threads);
}

RunChecks check_trajectory(const TimeSeries& ts, double h) {
  RunChecks c;
  if (ts.records.empty()) throw Error("check_trajectory: empty series");

  double int_d = 0.0;
  double max_dt = 0.0;
  c.min_entropy_step = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < ts.steps.size(); ++k) {
    const StepLog& a = ts.steps[k];
    const StepLog& b = ts.steps[k + 1];
    int_d += 0.5 * a.dt * (a.D + b.D);
    max_dt = std::max(max_dt, a.dt);
    c.min_entropy_step = std::min(c.min_entropy_step, (b.S - a.S) / std::max(std::abs(a.S), 1e-300));
  }
  if (ts.steps.size() < 2) c.min_entropy_step = 0.0;
  c.entropy_change = ts.steps.back().S - ts.steps.front().S;
  c.entropy_production_integral = int_d;
  const double gap = std::abs(c.entropy_change - int_d);
  c.entropy_identity_residual =
      c.entropy_change != 0.0 ? gap / std::abs(c.entropy_change) : (gap == 0.0 ? 0.0 : INFINITY);

  const Record& first = ts.records.front();
  const double momentum_scale = std::sqrt(std::max(first.mass * first.energy, 1e-300));
  double max_d = 1.0, max_mid = 1.0;
  for (const Record& r : ts.records) {
    max_d = std::max(max_d, std::abs(r.D_gamma));
    max_mid = std::max(max_mid, std::abs(r.ck_mid));
  }
  c.min_scaled_production = std::numeric_limits<double>::infinity();
  c.min_ck_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ts.records.size(); ++k) {
    const Record& r = ts.records[k];
    c.min_scaled_production = std::min(c.min_scaled_production, r.D_gamma / max_d);
    c.min_ck_margin = std::min(c.min_ck_margin, (r.ck_mid - r.ck_lhs) / max_mid);
    if (k > 0 && !(r.H_rel < ts.records[k - 1].H_rel)) c.h_rel_strictly_decreasing = false;
    const double drift = std::max(
        {first.mass != 0.0 ? std::abs(r.mass - first.mass) / std::abs(first.mass) : std::abs(r.mass),
         (r.momentum - first.momentum).norm() / momentum_scale,
         first.energy != 0.0 ? std::abs(r.energy - first.energy) / std::abs(first.energy)
                             : std::abs(r.energy)});
    c.conservation_drift = std::max(c.conservation_drift, drift);
    if (ts.epsilon > 0.0) {
      c.max_pauli_excess = std::max(c.max_pauli_excess, r.max_f - 1.0 / ts.epsilon);
    }
  }

  if (!ts.h_rel_violations.empty()) c.violations.push_back("H_rel increased between outputs");
  if (c.min_entropy_step < -1e-10) c.violations.push_back("S_eps decreased within a step");
  if (c.min_scaled_production < -1e-12) c.violations.push_back("negative entropy production");
  if (c.min_ck_margin < -1e-10) c.violations.push_back("Csiszar-Kullback lower bound violated");
  if (c.conservation_drift > 1e-10) c.violations.push_back("conserved quantities drifted");
  if (c.max_pauli_excess > 1e-12) c.violations.push_back("Pauli bound exceeded");
  if (gap > std::max(1e-3 * std::abs(c.entropy_change), 10.0 * h * h + 10.0 * max_dt * max_dt)) {
    c.violations.push_back("entropy identity residual above tolerance");
  }
  return c;
}

RunOutcome run(const RunConfig& config, const std::string& out_dir) {
  config.validate();
  const double eps = config.resolved_epsilon();
  const VelocityGrid grid(config.L, config.N);
  return run(config, build_initial_state(config.initial, grid, eps, config.seed), out_dir);
}

RunOutcome run(const RunConfig& config, const DistributionState& f0, const std::string& out_dir) {
  config.validate();
  f0.validate();
  RunOutcome outcome;
  outcome.epsilon = f0.epsilon;
  const double eps = outcome.epsilon;
  const VelocityGrid& grid = f0.grid;
  if (!(grid == VelocityGrid(config.L, config.N))) throw Error("run: initial state grid differs from the config");
  const SphereQuadrature sphere = build_sphere_quadrature(config.sphere_order);

  IntegrateOptions opts;
  opts.t_end = config.t_end;
  opts.output_interval = config.output_interval;
  opts.control = config.control;
  opts.s_values = config.s_values;
  opts.eta_values = config.eta_values;
  opts.keep_snapshots = !config.levels.empty();
  if (!config.equilibrium_reference) opts.reference = f0;
  outcome.series = integrate(f0, config.kernel, sphere, opts);
  const TimeSeries& ts = outcome.series;
  outcome.checks = check_trajectory(ts, grid.spacing());

  std::vector<double> times, h_rel, max_f;
  for (const Record& r : ts.records) {
    times.push_back(r.t);
    h_rel.push_back(r.H_rel);
    max_f.push_back(r.max_f);
  }

  json summary;
  summary["epsilon"] = eps;
  if (eps > 0.0 || config.initial.family != InitialDatum::Family::saturated) {
    const DatumMoments dm = datum_moments(config.initial, eps);
    summary["epsilon_sat"] = epsilon_sat(dm.rho, dm.theta);
  }
  summary["grid"] = {{"L", config.L}, {"N", config.N}, {"h", grid.spacing()}};
  summary["records"] = ts.records.size();
  summary["steps"] = ts.steps.size() - 1;
  summary["kappa0"] = nonsaturation_kappa(times, max_f, eps, 0.0);
  summary["tail_mass"] = {{"initial", boundary_mass_fraction(f0.values, grid)},
                          {"final", boundary_mass_fraction(ts.final_state->values, grid)}};

  const double t_a = config.fit_t_b > config.fit_t_a ? config.fit_t_a : 0.0;
  const double t_b = config.fit_t_b > config.fit_t_a ? config.fit_t_b : config.t_end;
  const double s_report = config.s_values.empty() ? 30.0 : config.s_values.back();
  try {
    summary["decay_fit"] = fit_json(decay_fit(times, h_rel, t_a, t_b, s_report, config.kernel.gamma));
  } catch (const Error& e) {
    summary["decay_fit"] = {{"error", e.what()}};
  }

  json monitors = json::array();
  const double f_in_l1 = moment(f0.values, grid, 0.0).m;
  const double f_in_l1_2 = moment(f0.values, grid, 2.0).m;
  for (std::size_t i = 0; i < config.s_values.size(); ++i) {
    const double s = config.s_values[i];
    if (s < std::max(2.0 - config.kernel.gamma, 4.0) || f_in_l1 <= 0.0) continue;
    std::vector<double> ms, msg;
    for (const Record& r : ts.records) {
      ms.push_back(r.m_s[i]);
      msg.push_back(r.m_s_gamma[i]);
    }
    const MomentMonitorReport rep = moment_inequality_monitor(
        times, ms, msg, config.kernel, {s, f_in_l1, f_in_l1_2, config.c1_prime});
    monitors.push_back({{"s", s}, {"c_s", rep.c_s}, {"C_s", rep.C_s}, {"c1", rep.c1},
                        {"min_margin", rep.min_margin}});
    if (rep.min_margin < 0.0) {
      outcome.checks.violations.push_back("moment inequality margin negative at s = " +
                                          format_double(s));
    }
  }
  summary["moment_monitor"] = monitors;

  json exponents;
  json decay = json::array();
  for (double s : config.s_values) {
    const ExponentReport e = expected_decay_exponent(s, config.kernel.gamma);
    decay.push_back({{"s", s}, {"value", e.value}, {"hypothesis_ok", e.hypothesis_ok}});
  }
  exponents["decay"] = decay;
  exponents["moment_envelope"] = moment_envelope_exponent(config.kernel.nu);
  if (2.0 > 3.0 * std::abs(config.kernel.gamma) / (2.0 * config.kernel.nu)) {
    exponents["linf_mass_s2"] = linf_mass_exponent(2.0, config.kernel.nu, config.kernel.gamma);
  }
  summary["exponents"] = exponents;

  if (!config.levels.empty() && config.t_end > 0.0) {
    json levels = json::array();
    for (double k : config.levels) {
      const double e = level_energy_functional(ts.snapshots, grid, k, 0.0, config.t_end,
                                               {config.kernel.gamma, config.kernel.nu, config.c0});
      levels.push_back({{"level", k}, {"E", e}});
    }
    summary["level_energy"] = levels;
  }

  const RunChecks& c = outcome.checks;
  summary["checks"] = {{"entropy_change", c.entropy_change},
                       {"entropy_production_integral", c.entropy_production_integral},
                       {"entropy_identity_residual", finite_or_null(c.entropy_identity_residual)},
                       {"min_entropy_step", c.min_entropy_step},
                       {"min_scaled_production", c.min_scaled_production},
                       {"min_ck_margin", c.min_ck_margin},
                       {"h_rel_strictly_decreasing", c.h_rel_strictly_decreasing},
                       {"conservation_drift", c.conservation_drift},
                       {"max_pauli_excess", c.max_pauli_excess},
                       {"violations", c.violations}};
  outcome.summary_json = summary.dump(2) + "\n";

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "timeseries.csv").string(), timeseries_csv(ts));
    write_text_file((dir / "timeseries.schema.json").string(), timeseries_schema_json(ts));
    write_text_file((dir / "summary.json").string(), outcome.summary_json);
    write_text_file((dir / "config.yaml").string(), serialize_config(config));
    write_checkpoint((dir / "final_state.bin").string(), *ts.final_state);
  }
  return outcome;
}

SweepOutcome sweep(const RunConfig& config, const std::vector<double>& fractions,
                   const std::string& out_dir) {
  if (fractions.empty()) throw Error("sweep: empty eps list");
  for (double f : fractions) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw Error("sweep: eps fractions must be >= 0");
  }
  std::vector<RunConfig> configs;
  std::size_t widest = 0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    RunConfig member = config;
    member.epsilon.reset();
    member.epsilon_fraction = fractions[k];
    member.sweep_fractions.clear();
    member.validate();
    if (fractions[k] > fractions[widest]) widest = k;
    configs.push_back(std::move(member));
  }
  const VelocityGrid grid(config.L, config.N);
  const DistributionState datum = build_initial_state(
      config.initial, grid, configs[widest].resolved_epsilon(), config.seed);

  SweepOutcome outcome;
  std::vector<SweepMember> members;
  json runs = json::array();
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    const RunConfig& member = configs[k];
    const std::string dir =
        out_dir.empty() ? "" : (std::filesystem::path(out_dir) / ("eps_" + std::to_string(k))).string();
    RunOutcome r =
        run(member, DistributionState(grid, datum.values, member.resolved_epsilon()), dir);
    members.push_back({r.epsilon, r.series});
    runs.push_back({{"directory", "eps_" + std::to_string(k)},
                    {"fraction", fractions[k]},
                    {"epsilon", r.epsilon},
                    {"violations", r.checks.violations}});
    outcome.members.push_back(std::move(r));
  }
  const double t_a = config.fit_t_b > config.fit_t_a ? config.fit_t_a : 0.0;
  const double t_b = config.fit_t_b > config.fit_t_a ? config.fit_t_b : config.t_end;
  outcome.report = compare_sweep(members, t_a, t_b, config.control.tol_bound);

  json table = json::array();
  std::string csv = "epsilon,kappa0,fit_exponent,fit_residual,final_H_rel,max_linf\n";
  for (const SweepRow& row : outcome.report.rows) {
    table.push_back({{"epsilon", row.epsilon},
                     {"kappa0", row.kappa0},
                     {"fit", fit_json(row.fit)},
                     {"final_H_rel", row.final_h_rel},
                     {"max_linf", row.max_linf}});
    csv += format_double(row.epsilon) + "," + format_double(row.kappa0) + "," +
           format_double(row.fit.exponent) + "," + format_double(row.fit.residual) + "," +
           format_double(row.final_h_rel) + "," + format_double(row.max_linf) + "\n";
  }
  json summary = {{"runs", runs},
                  {"table", table},
                  {"uniform_linf_bound", outcome.report.uniform_linf_bound},
                  {"no_monotone_growth", outcome.report.no_monotone_growth},
                  {"pauli_respected", outcome.report.pauli_respected}};
  outcome.summary_json = summary.dump(2) + "\n";
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text_file((std::filesystem::path(out_dir) / "sweep_summary.json").string(),
                    outcome.summary_json);
    write_text_file((std::filesystem::path(out_dir) / "sweep_table.csv").string(), csv);
  }
  return outcome;
}

}  // namespace bfd
