#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bfd/initial_data.hpp"
#include "bfd/integrator.hpp"
#include "bfd/kernel.hpp"

namespace bfd {

struct RunConfig {
  double L = 6.0;
  int N = 16;

  CollisionKernelSpec kernel;
  int sphere_order = 7;

  /// Exactly one of these is set after validation; the fraction is relative
  /// to eps_sat of the initial datum.
  std::optional<double> epsilon;
  std::optional<double> epsilon_fraction;

  InitialDatum initial;

  double t_end = 1.0;
  /// Time between outputs; 0 writes only t = 0 and t = T_end.
  double output_interval = 0.1;
  StepControl control;

  std::vector<double> s_values{4.0};
  std::vector<double> eta_values;
  std::vector<double> levels;
  double fit_t_a = 0.0;
  double fit_t_b = 0.0;
  double c0 = 1.0;
  double c1_prime = 0.0;
  bool equilibrium_reference = true;

  /// Sweep members as fractions of eps_sat (used by `sweep`).
  std::vector<double> sweep_fractions;

  std::uint64_t seed = 0;
  std::string output_dir = "out";

  /// Throws with a message naming the offending key.
  void validate() const;

  /// eps resolved against the datum's eps_sat.
  double resolved_epsilon() const;
};

/// YAML, or JSON (a YAML subset); the format is taken from the content.
RunConfig parse_config_string(const std::string& text);
RunConfig parse_config(const std::string& path);

/// Normalized YAML with every field spelled out.
std::string serialize_config(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace bfd
