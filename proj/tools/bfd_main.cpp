#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bfd/collision.hpp"
#include "bfd/config.hpp"
#include "bfd/equilibria.hpp"
#include "bfd/io.hpp"
#include "bfd/runner.hpp"
#include "bfd/verification.hpp"
#include "json.hpp"

namespace {

using json = nlohmann::ordered_json;

struct Common {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

bfd::RunConfig load(const Common& c) {
  if (c.config.empty()) throw bfd::Error("--config is required");
  bfd::RunConfig cfg = bfd::parse_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

std::string out_dir(const Common& c, const bfd::RunConfig& cfg) {
  return c.out.empty() ? cfg.output_dir : c.out;
}

void print_violations(const std::string& where, const std::vector<std::string>& violations) {
  for (const auto& v : violations) std::cerr << where << "violation: " << v << "\n";
}

int cmd_run(const Common& c) {
  const bfd::RunConfig cfg = load(c);
  const std::string dir = out_dir(c, cfg);
  const bfd::RunOutcome out = bfd::run(cfg, dir);
  std::cout << "wrote " << dir << " (" << out.series.records.size() << " outputs, "
            << out.series.steps.size() - 1 << " steps)\n";
  print_violations("", out.checks.violations);
  return out.checks.violations.empty() ? 0 : 1;
}

int cmd_sweep(const Common& c, std::vector<double> fractions) {
  const bfd::RunConfig cfg = load(c);
  if (fractions.empty()) fractions = cfg.sweep_fractions;
  if (fractions.empty()) throw bfd::Error("no eps fractions (use --fractions or sweep.epsilon_fractions)");
  const std::string dir = out_dir(c, cfg);
  const bfd::SweepOutcome out = bfd::sweep(cfg, fractions, dir);
  std::cout << out.summary_json;
  bool clean = out.report.pauli_respected;
  for (std::size_t k = 0; k < out.members.size(); ++k) {
    print_violations("eps_" + std::to_string(k) + ": ", out.members[k].checks.violations);
    clean = clean && out.members[k].checks.violations.empty();
  }
  return clean ? 0 : 1;
}

int cmd_equilibrium(const Common& c, double rho, std::vector<double> u, double theta,
                    std::optional<double> eps, std::optional<double> fraction) {
  if (!c.config.empty()) {
    const bfd::RunConfig cfg = load(c);
    const bfd::DatumMoments m = bfd::datum_moments(cfg.initial, cfg.resolved_epsilon());
    rho = m.rho;
    theta = m.theta;
    u = {cfg.initial.u.x(), cfg.initial.u.y(), cfg.initial.u.z()};
    if (!eps && !fraction) eps = cfg.resolved_epsilon();
  }
  if (u.size() != 3) throw bfd::Error("--u needs three components");
  if (eps && fraction) throw bfd::Error("give --eps or --eps-fraction, not both");
  const double sat = bfd::epsilon_sat(rho, theta);
  const double e = fraction ? *fraction * sat : eps.value_or(0.0);
  const bfd::FermiDiracParams p = bfd::solve_fd_params(rho, bfd::Vec3(u[0], u[1], u[2]), theta, e);
  json doc = {{"rho", rho},
              {"u", u},
              {"theta", theta},
              {"epsilon", e},
              {"epsilon_sat", sat},
              {"a_eps", p.a},
              {"b_eps", p.b},
              {"max_density", p.max_density()},
              {"mass_residual", p.mass_residual},
              {"energy_residual", p.energy_residual},
              {"iterations", p.iterations}};
  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    bfd::write_text_file((std::filesystem::path(c.out) / "equilibrium.json").string(), text);
  }
  return 0;
}

int cmd_verify(const Common& c, bool classical, const std::vector<int>& criteria, bool fault) {
  bfd::VerifyOptions opt;
  opt.classical = classical;
  opt.criteria = criteria;
  opt.inject_projection_fault = fault;
  if (c.seed) opt.seed = *c.seed;
  std::string table;
  const auto results = bfd::run_verification(opt, [&](const bfd::CriterionResult& r) {
    const std::string line = bfd::format_result(r);
    std::cout << line << std::endl;
    table += line + "\n";
  });
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << "\n";
  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    bfd::write_text_file((std::filesystem::path(c.out) / "verify.txt").string(), table);
  }
  return failed ? 1 : 0;
}

int cmd_cancellation(const Common& c, double L, int N, double gamma, double lambda, double cutoff,
                     std::vector<double> probe, int radial, int order) {
  if (probe.size() != 3) throw bfd::Error("--probe needs three components");
  bfd::CollisionKernelSpec spec;
  std::optional<bfd::RunConfig> cfg;
  if (!c.config.empty()) {
    cfg = load(c);
    spec = cfg->kernel;
    L = cfg->L;
    N = cfg->N;
  } else {
    spec.gamma = gamma;
  }
  const bfd::VelocityGrid grid(L, N);
  const bfd::DistributionState f =
      cfg ? bfd::build_initial_state(cfg->initial, grid, cfg->resolved_epsilon(), cfg->seed)
          : bfd::DistributionState(grid, grid.evaluate([](const bfd::Vec3& v) {
              return std::pow(2.0 * M_PI, -1.5) * std::exp(-0.5 * v.squaredNorm());
            }),
                                   0.0);
  bfd::CancellationSetup setup;
  setup.probe = bfd::Vec3(probe[0], probe[1], probe[2]);
  setup.lambda = lambda;
  setup.cutoff = cutoff;
  setup.radial_points = radial;
  setup.sphere_order = order;
  json doc = {{"L", L}, {"N", N}, {"gamma", spec.gamma}, {"lambda", lambda}, {"probe", probe}};
  for (auto [id, name] : {std::pair{bfd::CancellationIdentity::gain_point, "gain_point"},
                          std::pair{bfd::CancellationIdentity::partner_point, "partner_point"}}) {
    const double d = bfd::cancellation_oracle(f, spec, setup, id, bfd::CancellationSide::direct);
    const double r = bfd::cancellation_oracle(f, spec, setup, id, bfd::CancellationSide::reduced);
    doc[name] = {{"direct", d}, {"reduced", r}, {"relative_difference", std::abs(d - r) / std::abs(r)}};
  }
  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    bfd::write_text_file((std::filesystem::path(c.out) / "cancellation.json").string(), text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boltzmann-Fermi-Dirac relaxation solver"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "YAML or JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--threads", common.threads, "worker threads (0 = auto)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "seed for randomized data");
  };

  auto* run = app.add_subcommand("run", "integrate one configuration");
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "one run per eps fraction");
  add_common(sweep);
  std::vector<double> fractions;
  sweep->add_option("--fractions", fractions, "eps / eps_sat values")->delimiter(',');

  auto* equilibrium = app.add_subcommand("equilibrium", "solve for Fermi-Dirac parameters");
  add_common(equilibrium);
  double rho = 1.0, theta = 1.0;
  std::vector<double> u{0.0, 0.0, 0.0};
  std::optional<double> eps, fraction;
  equilibrium->add_option("--rho", rho, "mass");
  equilibrium->add_option("--theta", theta, "temperature");
  equilibrium->add_option("--u", u, "bulk velocity")->delimiter(',')->expected(3);
  equilibrium->add_option("--eps", eps, "quantum parameter");
  equilibrium->add_option("--eps-fraction", fraction, "eps / eps_sat");

  auto* verify = app.add_subcommand("verify", "acceptance suite");
  add_common(verify);
  bool classical = false, fault = false;
  std::vector<int> criteria;
  verify->add_flag("--classical", classical, "eps = 0 profile");
  verify->add_option("--criteria", criteria, "subset of criterion ids")->delimiter(',');
  verify->add_flag("--inject-projection-fault", fault, "disable the conservation projection");

  auto* cancel = app.add_subcommand("cancellation-check", "both sides of the cancellation identities");
  add_common(cancel);
  double L = 5.0, gamma = -1.0, lambda = 1.0, cutoff = 0.0;
  int N = 24, radial = 96, order = 41;
  std::vector<double> probe{0.3, 0.2, -0.1};
  cancel->add_option("--L", L, "box half width");
  cancel->add_option("--N", N, "points per axis");
  cancel->add_option("--gamma", gamma, "kinetic exponent");
  cancel->add_option("--lambda", lambda, "inner radius");
  cancel->add_option("--cutoff", cutoff, "outer radius (0 = L)");
  cancel->add_option("--probe", probe, "probe velocity")->delimiter(',')->expected(3);
  cancel->add_option("--radial-points", radial, "radial nodes");
  cancel->add_option("--sphere-order", order, "sphere rule order");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto* sub : {run, sweep, equilibrium, verify, cancel}) {
      if (sub->count("--seed")) common.seed = seed;
    }
    bfd::set_thread_count(common.threads);
    if (*run) return cmd_run(common);
    if (*sweep) return cmd_sweep(common, fractions);
    if (*equilibrium) return cmd_equilibrium(common, rho, u, theta, eps, fraction);
    if (*verify) return cmd_verify(common, classical, criteria, fault);
    if (*cancel) return cmd_cancellation(common, L, N, gamma, lambda, cutoff, probe, radial, order);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
