#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emod/blocks.hpp"

namespace emod {

struct InputEvent {
  int t_ms = 0;
  std::string kind;  // "tap" (x, y) or "key" (code)
  std::vector<int> payload;

  bool operator==(const InputEvent&) const = default;
};

/// Input generator and removal policy for one usage scenario.
struct ScenarioSpec {
  std::string name = "click-and-move";
  double min_duration_s = 2.0;
  double max_duration_s = 4.0;
  double fps = 30.0;
  int min_taps = 2;
  int max_taps = 12;
  int min_keys = 0;
  int max_keys = 6;
  int screen_width = 480;
  int screen_height = 800;
  int key_codes = 8;
  int max_removed = 8;           // k: removal set size is uniform in 0..k
  std::vector<int> keep_blocks;  // never removed
  bool protocol_fidelity = false;
  double fidelity_duration_s = 100.0;
};

struct ExecutionCase {
  int id = 0;
  std::string scenario;
  std::vector<InputEvent> inputs;
  std::vector<int> removed;  // sorted block ids
  double duration_s = 0.0;

  bool operator==(const ExecutionCase&) const = default;
};

/// Removable blocks a scenario may actually remove.
std::vector<int> eligible_blocks(const BlockTable& table, const ScenarioSpec& scenario);

/// Seeded case plan. Case 0 removes nothing; every eligible block is removed in at least one case.
/// Throws PlanError for unknown keep_blocks ids, count < 1, or a count too small for coverage.
std::vector<ExecutionCase> plan_cases(const BlockTable& table, const ScenarioSpec& scenario, int count,
                                      std::uint64_t seed);

/// Additional random cases with ids following `first_id`, drawn from an independent stream.
std::vector<ExecutionCase> augment_cases(const BlockTable& table, const ScenarioSpec& scenario,
                                         int first_id, int count, std::uint64_t seed);

enum class RunKind : std::uint8_t { Path, Idle, Measured };

const char* to_string(RunKind k);

struct ScheduledRun {
  RunKind kind = RunKind::Path;
  int repeat = 0;  // index within its kind
};

/// One path-logging run, then `repeats` idle runs, then `repeats` measured runs.
struct RunSchedule {
  int case_id = 0;
  int repeats = 0;
  std::vector<ScheduledRun> runs;
};

RunSchedule schedule(const ExecutionCase& c, int repeats);

struct PlanMeta {
  std::uint64_t seed = 0;
  std::string config_hash;
};

std::string plan_to_json(const std::vector<ExecutionCase>& cases, const PlanMeta& meta, int indent = 2);
std::vector<ExecutionCase> plan_from_json(const std::string& text, PlanMeta* meta = nullptr);

}  // namespace emod
