#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bfd/config.hpp"
#include "bfd/io.hpp"
#include "bfd/runner.hpp"
#include "json.hpp"

using namespace bfd;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const char* small_config = R"(grid: {L: 3.0, N: 6}
kernel: {gamma: -0.5, nu: 0.75, angular: constant, b0: 0.5, sphere_order: 3}
physics: {epsilon_fraction: 0.2}
initial: {family: two_maxwellian_mixture, rho: 1.0, separation: 0.8, component_theta: 0.5, weight: 0.5}
time: {t_end: 0.2, output_interval: 0.1}
diagnostics: {s_values: [4, 6], eta_values: [0.0]}
seed: 3
)";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bfd_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string cli() {
  const char* p = std::getenv("BFD_CLI");
  return p ? p : "";
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_config_string(small_config);
  CHECK(c.L == 3.0);
  CHECK(c.N == 6);
  CHECK(c.kernel.angular.b0 == 0.5);
  CHECK(c.sphere_order == 3);
  CHECK(c.epsilon_fraction.value() == 0.2);
  CHECK_FALSE(c.epsilon.has_value());
  CHECK(c.initial.family == InitialDatum::Family::two_maxwellian_mixture);
  CHECK(c.s_values.size() == 2);
  CHECK(c.seed == 3);
  CHECK(c.resolved_epsilon() > 0.0);

  const RunConfig j = parse_config_string(R"({"grid": {"L": 3.0, "N": 6}, "physics": {"epsilon": 0.5}, "initial": {"family": "maxwellian"}})");
  CHECK(j.N == 6);
  CHECK(j.epsilon.value() == 0.5);
  CHECK(j.resolved_epsilon() == 0.5);
}

TEST_CASE("config rejections") {
  const std::string grid = "grid: {L: 3.0, N: 6}\n";
  const std::string initial = "initial: {family: maxwellian}\n";
  CHECK_NOTHROW(parse_config_string(grid + initial));
  CHECK_THROWS_AS(parse_config_string(""), Error);
  CHECK_THROWS_AS(parse_config_string(grid), Error);
  CHECK_THROWS_AS(parse_config_string(initial), Error);
  CHECK_THROWS_AS(parse_config_string("grid: {L: 3.0, N: 6, M: 2}\n" + initial), Error);
  CHECK_THROWS_AS(parse_config_string("grid: {L: 3.0, N: 7}\n" + initial), Error);
  CHECK_THROWS_AS(parse_config_string("grid: {L: abc, N: 6}\n" + initial), Error);
  CHECK_THROWS_AS(parse_config_string("grid: [1, 2]\n" + initial), Error);
  CHECK_THROWS_AS(parse_config_string(grid + "initial: {family: unknown}\n"), Error);
  CHECK_THROWS_AS(parse_config_string(grid + "initial: {family: maxwellian, u: [1, 2]}\n"), Error);
  for (const char* extra : {"bogus: 1", "physics: {epsilon: -0.1}", "physics: {epsilon: 0.1, epsilon_fraction: 0.2}",
                            "physics: {epsilon_fraction: 1.5}", "kernel: {gamma: -1.0, nu: 0.4}", "kernel: {angular: sideways}",
                            "kernel: {sphere_order: 4}", "time: {t_end: -1}", "diagnostics: {fit_window: [1]}",
                            "sweep: {epsilon_fractions: [0.1, -0.2]}", "grid: {L: 3.0, N: 6}: x"}) {
    CAPTURE(extra);
    CHECK_THROWS_AS(parse_config_string(grid + initial + extra + "\n"), Error);
  }
  CHECK_THROWS_AS(parse_config("/nonexistent/config.yaml"), Error);
  try {
    parse_config_string(grid + initial + "kernel: {gamma: -0.5, nu: 0.75, colour: red}\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "kernel.colour: unknown key");
  }
}

TEST_CASE("serialize round trip") {
  const RunConfig c = parse_config_string(small_config);
  const std::string text = serialize_config(c);
  const RunConfig back = parse_config_string(text);
  CHECK(back == c);
  CHECK(serialize_config(back) == text);
  RunConfig d = c;
  d.t_end = 0.3;
  CHECK_FALSE(d == c);
}

TEST_CASE("run is deterministic and matches its schema") {
  const RunConfig c = parse_config_string(small_config);
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  set_thread_count(1);
  const RunOutcome ra = run(c, a.string());
  set_thread_count(2);
  const RunOutcome rb = run(c, b.string());
  set_thread_count(0);
  CHECK(ra.checks.conservation_drift < 1e-11);

  for (const char* f : {"timeseries.csv", "timeseries.schema.json", "summary.json", "config.yaml", "final_state.bin"}) {
    REQUIRE(fs::exists(a / f));
  }
  CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
  CHECK(slurp(a / "final_state.bin") == slurp(b / "final_state.bin"));

  const json schema = json::parse(slurp(a / "timeseries.schema.json"));
  std::istringstream csv(slurp(a / "timeseries.csv"));
  std::string header, line;
  std::getline(csv, header);
  const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',') + 1);
  REQUIRE(schema.contains("columns"));
  CHECK(schema["columns"].size() == columns);
  CHECK(schema["columns"][0]["name"] == header.substr(0, header.find(',')));
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    REQUIRE(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1) == columns);
  }
  CHECK(rows == ra.series.records.size());
  CHECK(rows == 3);

  const json summary = json::parse(slurp(a / "summary.json"));
  CHECK(summary["epsilon"].get<double>() == doctest::Approx(ra.epsilon));
  CHECK(summary["tail_mass"]["initial"].get<double>() >= 0.0);
  CHECK(summary["tail_mass"]["final"].get<double>() < 1.0);
  CHECK(parse_config((a / "config.yaml").string()) == c);
  CHECK(read_checkpoint((a / "final_state.bin").string()).time == doctest::Approx(0.2));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("equilibrium datum starts at the reference") {
  RunConfig c = parse_config_string(small_config);
  c.initial.family = InitialDatum::Family::fermi_dirac;
  c.initial.theta = 0.6;
  c.N = 8;
  c.L = 4.0;
  const RunOutcome r = run(c, "");
  CHECK(std::abs(r.series.records.front().H_rel) <= 1e-12);
  // the scheme's own steady state sits a grid-dependent distance away
  CHECK(r.series.records.back().H_rel <= 5e-3);
}

TEST_CASE("sweep") {
  const RunConfig c = parse_config_string(small_config);
  const fs::path dir = scratch("sweep");
  const SweepOutcome one = sweep(c, {0.3}, dir.string());
  CHECK(one.members.size() == 1);
  CHECK(one.report.rows.size() == 1);
  CHECK(fs::exists(dir / "eps_0" / "timeseries.csv"));
  CHECK(fs::exists(dir / "sweep_summary.json"));
  CHECK(fs::exists(dir / "sweep_table.csv"));
  CHECK(one.report.pauli_respected);
  CHECK(one.report.rows[0].kappa0 > 0.0);
  CHECK_THROWS_AS(sweep(c, {0.1, -0.2}, dir.string()), Error);
  CHECK_THROWS_AS(sweep(c, {}, dir.string()), Error);
  CHECK_THROWS_AS(set_thread_count(-1), Error);
  fs::remove_all(dir);
}

TEST_CASE("command line") {
  const std::string bin = cli();
  if (bin.empty()) {
    MESSAGE("BFD_CLI not set; skipping");
    return;
  }
  const fs::path dir = scratch("cmd");
  {
    std::ofstream(dir / "small.yaml") << small_config;
  }
  const std::string cfg = (dir / "small.yaml").string();

  CHECK(shell(bin + " --help") == 0);
  CHECK(shell(bin) != 0);
  CHECK(shell(bin + " run --config " + (dir / "missing.yaml").string()) != 0);
  CHECK(shell(bin + " run --config " + cfg + " --threads -2") != 0);

  CHECK(shell(bin + " run --config " + cfg + " --out " + (dir / "run").string() + " --threads 1 --seed 5") == 0);
  CHECK(fs::exists(dir / "run" / "summary.json"));
  CHECK(parse_config((dir / "run" / "config.yaml").string()).seed == 5);

  CHECK(shell(bin + " sweep --config " + cfg + " --out " + (dir / "sweep").string() + " --fractions 0,0.3") == 0);
  CHECK(fs::exists(dir / "sweep" / "eps_1" / "summary.json"));
  CHECK(shell(bin + " sweep --config " + cfg + " --out " + (dir / "bad").string() + " --fractions=-0.3") == 2);

  CHECK(shell(bin + " equilibrium --rho 1 --theta 1 --eps 0 --out " + (dir / "eq").string()) == 0);
  const json eq = json::parse(slurp(dir / "eq" / "equilibrium.json"));
  CHECK(eq["a_eps"].get<double>() == doctest::Approx(0.0634936359342410).epsilon(1e-12));
  CHECK(eq["b_eps"].get<double>() == doctest::Approx(0.5));
  CHECK(shell(bin + " equilibrium --rho 1 --theta 1 --eps-fraction 1.2") != 0);
  CHECK(shell(bin + " equilibrium --config " + cfg) == 0);

  CHECK(shell(bin + " cancellation-check --L 3 --N 8 --radial-points 8 --sphere-order 5 --out " + (dir / "cc").string()) == 0);
  const json cc = json::parse(slurp(dir / "cc" / "cancellation.json"));
  CHECK(cc["gain_point"]["direct"].get<double>() > 0.0);

  CHECK(shell(bin + " verify --criteria 1,4,11 --out " + (dir / "verify").string()) == 0);
  CHECK(slurp(dir / "verify" / "verify.txt").find("PASS") != std::string::npos);
  CHECK(shell(bin + " verify --criteria 2 --inject-projection-fault --out " + (dir / "fault").string()) == 1);
  CHECK(slurp(dir / "fault" / "verify.txt").rfind("FAIL", 0) == 0);
  fs::remove_all(dir);
}
