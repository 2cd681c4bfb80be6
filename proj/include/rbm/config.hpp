#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "rbm/optimizer.hpp"

namespace rbm {

/// Flat-section key-value configuration (TOML-compatible subset: [section],
/// key = value, # comments; values are floats, ints, bools or "strings").
class Config {
 public:
  static Config parse(const std::string& text);
  static Config parse_file(const std::filesystem::path& path);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  /// Normalized text echo (sorted keys) for manifests.
  std::string echo() const;

 private:
  std::map<std::string, std::string> kv_;
};

/// Materialized scenario: everything a run mode needs.
struct Scenario {
  BoxGrid grid{8, 8, 8, 1.0, 1.0};
  NondimParams params{};
  CostWeights weights{};
  SolveOptions solver{};
  OptimizerOptions optimizer{};

  // control initialization: uniform value + seeded random perturbation
  double g_init = 0.0, g_perturb = 0.0;
  double phi1_init = 0.0, phi1_perturb = 0.0;
  double phi2_init = 0.0, phi2_perturb = 0.0;
  ConstraintSet set_g, set_phi1, set_phi2;
  std::string gamma01 = "lateral";  // "lateral" | "bottom" | "lateral+bottom"

  std::string targets_kind = "zero";  // "zero" | "basic_state" | "file"
  std::string targets_file;           // state CSV for kind == "file"

  double uniqueness_C_ref = 1.0;
  double beta0_C_ref = 1.0;
  double C1_ref = 1.0;
  int second_order_samples = 0;
  bool h12_l2_only = false;

  std::string out_dir = "out";
  std::uint64_t seed = 0;

  std::unique_ptr<Discretization> make_discretization() const;
  ControlTriple build_controls(const Discretization& d) const;
  Targets build_targets(const Discretization& d) const;
};

/// Validates and materializes a scenario; throws std::invalid_argument on
/// config errors (missing files, mode (ii) with vanishing gamma4..6, ...).
Scenario load_scenario(const Config& cfg);

}  // namespace rbm
