#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "drp/observables.hpp"

namespace drp {

/// Inclusive grid `start:stop:count`, a single number, or a comma list.
std::vector<double> parse_grid(const std::string& spec);

struct SweepSpec {
  std::vector<double> j0_mhz{0.0};
  std::vector<double> nu_d_mhz{0.0};
  std::vector<double> delta_d{0.0};
  /// Damping times; empty means undamped.
  std::vector<double> tau_us;
  /// chi, phi_par, phi_perp, gamma, measure ids (c_r_st, c_r_ud, c_l1_st,
  /// c_l1_ud, c_st, c_1, e_c, e_n), global_l1_st, global_l1_ud,
  /// global_coherent_yield.
  std::vector<std::string> observables{"chi"};
  Solver solver = Solver::Auto;
  int orient_level = 3;
  double t_max = 12.5;
  double measure_t_upper = 5.0;
  /// Measure weighting: renormalize (default) or raw.
  std::string weighting = "renormalize";

  void validate() const;
  std::size_t size() const;
};

struct OutputSpec {
  std::string path;
  std::string trajectory_path;
};

/// A full run description. JSON sections: system, field, driving, rates,
/// sweep, output.
struct RunConfig {
  std::string preset = "one_nitrogen";
  SimulationSetup setup;
  SweepSpec sweep;
  OutputSpec output;

  void validate() const;
};

nlohmann::json system_to_json(const SpinSystem& s);
SpinSystem system_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const RunConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Default config for a preset name.
RunConfig default_config(const std::string& preset = "one_nitrogen");

/// 64-bit FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

/// Engine version plus the source revision when known.
std::string engine_version();

}  // namespace drp
