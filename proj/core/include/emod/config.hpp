#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "emod/device.hpp"
#include "emod/planner.hpp"
#include "emod/regress.hpp"

namespace emod {

/// Everything a pipeline run depends on. Paths are absolute or relative to the working directory.
struct RunConfig {
  std::string program_path;
  std::string plan_path;  // optional: use this plan instead of generating one
  std::string output_dir = "emod-out";
  std::uint64_t seed = 42;

  ScenarioSpec scenario;
  int cases = 150;
  double min_rank_fraction = 0.9;  // augment the plan until rank(N) reaches this share of l
  int max_augment_rounds = 4;
  int augment_batch = 16;

  TruthOptions truth;
  double rate_hz = 30.0;
  SensorMode sensor = SensorMode::Averaging;
  int repeats = 10;

  FitConfig fit;
  int rounds = 4;

  bool svg = false;
  int top_k = 10;
  std::vector<std::string> variants;              // programs compared in the report
  std::map<std::string, double> variant_costs;    // costs for ops the model lacks

  int jobs = 0;
  bool log_removed = true;
  bool full_log = false;
};

/// Reads a TOML config. Input paths inside it resolve against the file's directory; the output
/// directory stays relative to the working directory.
/// Throws ConfigError naming the offending key.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& toml_text, const std::string& base_dir = ".");

/// Canonical JSON of every setting that can change results (output_dir and jobs excluded).
std::string normalized_config(const RunConfig& config);
/// 16 hex digits of FNV-1a over the normalized config.
std::string config_hash(const RunConfig& config);

}  // namespace emod
