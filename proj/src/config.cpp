#include "bfd/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "bfd/equilibria.hpp"
#include "bfd/sphere.hpp"

namespace bfd {

namespace {

class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw Error(where("") + " must be a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw Error(where(key) + ": cannot parse value");
    }
  }

  template <typename T>
  void require(const std::string& key, T& out) {
    if (!has(key)) throw Error(where(key) + ": missing key");
    read(key, out);
  }

  void read_vec3(const std::string& key, Vec3& out) {
    std::vector<double> v;
    read(key, v);
    if (!has(key)) return;
    if (v.size() != 3) throw Error(where(key) + ": expected three components");
    out = Vec3(v[0], v[1], v[2]);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), where(key));
  }

  void reject_unknown() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw Error(where(key) + ": unknown key");
    }
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw Error(key + ": " + message);
}

std::string angular_name(AngularModel::Kind kind) {
  return kind == AngularModel::Kind::constant ? "constant" : "truncated_power";
}

}  // namespace

double RunConfig::resolved_epsilon() const {
  if (epsilon) return *epsilon;
  if (epsilon_fraction) {
    const DatumMoments m = datum_moments(initial, 1.0);
    return *epsilon_fraction * epsilon_sat(m.rho, m.theta);
  }
  return 0.0;
}

void RunConfig::validate() const {
  check(std::isfinite(L) && L > 0.0, "grid.L", "must be finite and positive");
  check(N >= 4 && N % 2 == 0, "grid.N", "must be even and >= 4");
  try {
    kernel.validate();
  } catch (const Error& e) {
    throw Error(std::string("kernel: ") + e.what());
  }
  check(is_supported_sphere_order(sphere_order), "kernel.sphere_order",
        "unsupported (odd orders 1..99 are available)");
  check(!(epsilon && epsilon_fraction), "physics", "set either epsilon or epsilon_fraction, not both");
  if (epsilon) check(std::isfinite(*epsilon) && *epsilon >= 0.0, "physics.epsilon", "must be >= 0");
  if (epsilon_fraction) {
    check(std::isfinite(*epsilon_fraction) && *epsilon_fraction >= 0.0,
          "physics.epsilon_fraction", "must be >= 0");
    check(initial.family != InitialDatum::Family::saturated, "physics.epsilon_fraction",
          "the saturated family needs an explicit epsilon");
  }

  check(initial.rho > 0.0, "initial.rho", "must be positive");
  check(initial.u.allFinite(), "initial.u", "must be finite");
  check(initial.theta > 0.0, "initial.theta", "must be positive");
  check(initial.component_theta > 0.0, "initial.component_theta", "must be positive");
  check(initial.weight > 0.0 && initial.weight < 1.0, "initial.weight", "must lie in (0, 1)");
  check(initial.modes >= 0, "initial.modes", "must be >= 0");
  if (initial.family == InitialDatum::Family::saturated) {
    check(epsilon && *epsilon > 0.0, "physics.epsilon", "the saturated family needs epsilon > 0");
  }

  const bool needs_sub_saturation =
      (equilibrium_reference && initial.family != InitialDatum::Family::saturated) ||
      initial.family == InitialDatum::Family::fermi_dirac ||
      initial.family == InitialDatum::Family::perturbed_equilibrium;
  if (needs_sub_saturation) {
    const double eps = resolved_epsilon();
    const DatumMoments m = datum_moments(initial, eps);
    const double sat = epsilon_sat(m.rho, m.theta);
    check(eps < sat * (1.0 - 1e-6), epsilon_fraction ? "physics.epsilon_fraction" : "physics.epsilon",
          "eps = " + std::to_string(eps) + " is not below eps_sat = " + std::to_string(sat) +
              "; the Fermi-Dirac equilibrium needs 5 theta > (3 eps rho / 4 pi)^(2/3)");
  }

  check(std::isfinite(t_end) && t_end >= 0.0, "time.t_end", "must be finite and >= 0");
  check(std::isfinite(output_interval) && output_interval >= 0.0, "time.output_interval",
        "must be >= 0");
  try {
    control.validate();
  } catch (const Error& e) {
    throw Error(std::string("time: ") + e.what());
  }

  for (double s : s_values) check(std::isfinite(s), "diagnostics.s_values", "must be finite");
  for (double eta : eta_values) check(std::isfinite(eta), "diagnostics.eta_values", "must be finite");
  for (double k : levels) check(k >= 0.0, "diagnostics.levels", "must be >= 0");
  check(fit_t_a >= 0.0 && fit_t_b >= fit_t_a, "diagnostics.fit_window", "need 0 <= t_a <= t_b");
  check(c0 > 0.0, "diagnostics.c0", "must be positive");
  check(c1_prime >= 0.0, "diagnostics.c1_prime", "must be >= 0 (0 selects the default)");
  for (double f : sweep_fractions) {
    check(std::isfinite(f) && f >= 0.0, "sweep.epsilon_fractions", "entries must be >= 0");
    if (equilibrium_reference) {
      check(f < 1.0 - 1e-6, "sweep.epsilon_fractions", "entries must be below 1 (eps < eps_sat)");
    }
  }
  check(!output_dir.empty(), "output_dir", "must not be empty");
}

RunConfig parse_config_string(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(std::string("config: malformed input: ") + e.what());
  }
  if (!root || root.IsNull()) throw Error("config: empty document");
  Section top(root, "");
  RunConfig c;

  {
    Section grid = top.child("grid");
    grid.require("L", c.L);
    grid.require("N", c.N);
    grid.reject_unknown();
  }
  {
    Section k = top.child("kernel");
    k.read("gamma", c.kernel.gamma);
    k.read("nu", c.kernel.nu);
    std::string angular = "constant";
    k.read("angular", angular);
    if (angular == "constant") {
      c.kernel.angular.kind = AngularModel::Kind::constant;
    } else if (angular == "truncated_power") {
      c.kernel.angular.kind = AngularModel::Kind::truncated_power;
    } else {
      throw Error("kernel.angular: unknown model '" + angular + "'");
    }
    k.read("b0", c.kernel.angular.b0);
    k.read("C", c.kernel.angular.C);
    k.read("theta_cut", c.kernel.angular.theta_cut);
    k.read("sphere_order", c.sphere_order);
    k.reject_unknown();
  }
  {
    Section p = top.child("physics");
    if (p.has("epsilon")) {
      double e = 0.0;
      p.read("epsilon", e);
      c.epsilon = e;
    }
    if (p.has("epsilon_fraction")) {
      double e = 0.0;
      p.read("epsilon_fraction", e);
      c.epsilon_fraction = e;
    }
    p.reject_unknown();
  }
  {
    Section in = top.child("initial");
    std::string family;
    in.require("family", family);
    c.initial.family = parse_family(family);
    in.read("rho", c.initial.rho);
    in.read_vec3("u", c.initial.u);
    in.read("theta", c.initial.theta);
    in.read("separation", c.initial.separation);
    in.read("component_theta", c.initial.component_theta);
    in.read("weight", c.initial.weight);
    in.read("amplitude", c.initial.amplitude);
    in.read("modes", c.initial.modes);
    in.read("mode_amplitude", c.initial.mode_amplitude);
    in.reject_unknown();
  }
  {
    Section t = top.child("time");
    t.read("t_end", c.t_end);
    t.read("output_interval", c.output_interval);
    t.read("dt", c.control.dt);
    t.read("dt_min", c.control.dt_min);
    t.read("dt_max", c.control.dt_max);
    t.read("safety", c.control.safety);
    t.read("tol_bound", c.control.tol_bound);
    t.read("max_halvings", c.control.max_halvings);
    t.reject_unknown();
  }
  {
    Section d = top.child("diagnostics");
    d.read("s_values", c.s_values);
    d.read("eta_values", c.eta_values);
    d.read("levels", c.levels);
    if (d.has("fit_window")) {
      std::vector<double> w;
      d.read("fit_window", w);
      if (w.size() != 2) throw Error("diagnostics.fit_window: expected [t_a, t_b]");
      c.fit_t_a = w[0];
      c.fit_t_b = w[1];
    }
    d.read("c0", c.c0);
    d.read("c1_prime", c.c1_prime);
    d.read("equilibrium_reference", c.equilibrium_reference);
    d.reject_unknown();
  }
  {
    Section s = top.child("sweep");
    s.read("epsilon_fractions", c.sweep_fractions);
    s.reject_unknown();
  }
  top.read("seed", c.seed);
  top.read("output_dir", c.output_dir);
  top.reject_unknown();

  c.validate();
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_string(buffer.str());
}

std::string serialize_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto seq = [&](const std::vector<double>& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double x : v) out << x;
    out << YAML::EndSeq;
  };
  out << YAML::BeginMap;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "L" << YAML::Value << c.L;
  out << YAML::Key << "N" << YAML::Value << c.N;
  out << YAML::EndMap;

  out << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gamma" << YAML::Value << c.kernel.gamma;
  out << YAML::Key << "nu" << YAML::Value << c.kernel.nu;
  out << YAML::Key << "angular" << YAML::Value << angular_name(c.kernel.angular.kind);
  out << YAML::Key << "b0" << YAML::Value << c.kernel.angular.b0;
  out << YAML::Key << "C" << YAML::Value << c.kernel.angular.C;
  out << YAML::Key << "theta_cut" << YAML::Value << c.kernel.angular.theta_cut;
  out << YAML::Key << "sphere_order" << YAML::Value << c.sphere_order;
  out << YAML::EndMap;

  out << YAML::Key << "physics" << YAML::Value << YAML::BeginMap;
  if (c.epsilon_fraction) {
    out << YAML::Key << "epsilon_fraction" << YAML::Value << *c.epsilon_fraction;
  } else {
    out << YAML::Key << "epsilon" << YAML::Value << c.epsilon.value_or(0.0);
  }
  out << YAML::EndMap;

  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << family_name(c.initial.family);
  out << YAML::Key << "rho" << YAML::Value << c.initial.rho;
  out << YAML::Key << "u" << YAML::Value;
  seq({c.initial.u.x(), c.initial.u.y(), c.initial.u.z()});
  out << YAML::Key << "theta" << YAML::Value << c.initial.theta;
  out << YAML::Key << "separation" << YAML::Value << c.initial.separation;
  out << YAML::Key << "component_theta" << YAML::Value << c.initial.component_theta;
  out << YAML::Key << "weight" << YAML::Value << c.initial.weight;
  out << YAML::Key << "amplitude" << YAML::Value << c.initial.amplitude;
  out << YAML::Key << "modes" << YAML::Value << c.initial.modes;
  out << YAML::Key << "mode_amplitude" << YAML::Value << c.initial.mode_amplitude;
  out << YAML::EndMap;

  out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "t_end" << YAML::Value << c.t_end;
  out << YAML::Key << "output_interval" << YAML::Value << c.output_interval;
  out << YAML::Key << "dt" << YAML::Value << c.control.dt;
  out << YAML::Key << "dt_min" << YAML::Value << c.control.dt_min;
  out << YAML::Key << "dt_max" << YAML::Value << c.control.dt_max;
  out << YAML::Key << "safety" << YAML::Value << c.control.safety;
  out << YAML::Key << "tol_bound" << YAML::Value << c.control.tol_bound;
  out << YAML::Key << "max_halvings" << YAML::Value << c.control.max_halvings;
  out << YAML::EndMap;

  out << YAML::Key << "diagnostics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "s_values" << YAML::Value;
  seq(c.s_values);
  out << YAML::Key << "eta_values" << YAML::Value;
  seq(c.eta_values);
  out << YAML::Key << "levels" << YAML::Value;
  seq(c.levels);
  out << YAML::Key << "fit_window" << YAML::Value;
  seq({c.fit_t_a, c.fit_t_b});
  out << YAML::Key << "c0" << YAML::Value << c.c0;
  out << YAML::Key << "c1_prime" << YAML::Value << c.c1_prime;
  out << YAML::Key << "equilibrium_reference" << YAML::Value << c.equilibrium_reference;
  out << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "epsilon_fractions" << YAML::Value;
  seq(c.sweep_fractions);
  out << YAML::EndMap;

  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace bfd
