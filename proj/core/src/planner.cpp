#include "emod/planner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "emod/error.hpp"
#include "emod/random.hpp"
#include "json.hpp"

namespace emod {

std::vector<int> eligible_blocks(const BlockTable& table, const ScenarioSpec& scenario) {
  std::set<int> keep;
  for (int b : scenario.keep_blocks) {
    if (b < 0 || b >= table.size())
      throw PlanError("scenario '" + scenario.name + "' references unknown block " + std::to_string(b));
    keep.insert(b);
  }
  std::vector<int> out;
  for (int b : table.removable_ids())
    if (!keep.count(b)) out.push_back(b);
  return out;
}

namespace {

void validate(const ScenarioSpec& s) {
  if (!(s.min_duration_s > 0) || s.max_duration_s < s.min_duration_s)
    throw PlanError("scenario '" + s.name + "' has an invalid duration range");
  if (!(s.fps > 0)) throw PlanError("scenario '" + s.name + "' needs fps > 0");
  if (s.min_taps < 0 || s.max_taps < s.min_taps || s.min_keys < 0 || s.max_keys < s.min_keys)
    throw PlanError("scenario '" + s.name + "' has an invalid event count range");
  if (s.screen_width < 1 || s.screen_height < 1 || s.key_codes < 1)
    throw PlanError("scenario '" + s.name + "' has an invalid screen or key range");
  if (s.max_removed < 0) throw PlanError("max_removed must be non-negative");
}

ExecutionCase draw_case(Rng& rng, const ScenarioSpec& s, const std::vector<int>& eligible, int id,
                        bool remove) {
  ExecutionCase c;
  c.id = id;
  c.scenario = s.name;
  double d = rng.uniform(s.min_duration_s, s.max_duration_s);
  d = std::round(d * 1000.0) / 1000.0;
  if (s.protocol_fidelity) d = std::max(d, s.fidelity_duration_s);
  c.duration_s = d;

  int span_ms = std::max(1, static_cast<int>(d * 1000.0));
  int taps = static_cast<int>(rng.uniform_int(s.min_taps, s.max_taps));
  int keys = static_cast<int>(rng.uniform_int(s.min_keys, s.max_keys));
  for (int i = 0; i < taps; ++i) {
    InputEvent e;
    e.t_ms = static_cast<int>(rng.uniform_int(0, span_ms - 1));
    e.kind = "tap";
    e.payload = {static_cast<int>(rng.uniform_int(0, s.screen_width - 1)),
                 static_cast<int>(rng.uniform_int(0, s.screen_height - 1))};
    c.inputs.push_back(std::move(e));
  }
  for (int i = 0; i < keys; ++i) {
    InputEvent e;
    e.t_ms = static_cast<int>(rng.uniform_int(0, span_ms - 1));
    e.kind = "key";
    e.payload = {static_cast<int>(rng.uniform_int(0, s.key_codes - 1))};
    c.inputs.push_back(std::move(e));
  }
  std::stable_sort(c.inputs.begin(), c.inputs.end(),
                   [](const InputEvent& a, const InputEvent& b) { return a.t_ms < b.t_ms; });

  if (remove && !eligible.empty()) {
    int k = std::min<int>(s.max_removed, static_cast<int>(eligible.size()));
    int size = static_cast<int>(rng.uniform_int(0, k));
    std::vector<int> pool = eligible;
    for (int i = 0; i < size; ++i) {
      auto j = static_cast<std::size_t>(rng.uniform_int(i, static_cast<std::int64_t>(pool.size()) - 1));
      std::swap(pool[i], pool[j]);
    }
    c.removed.assign(pool.begin(), pool.begin() + size);
    std::sort(c.removed.begin(), c.removed.end());
  }
  return c;
}

}  // namespace

std::vector<ExecutionCase> plan_cases(const BlockTable& table, const ScenarioSpec& scenario, int count,
                                      std::uint64_t seed) {
  validate(scenario);
  if (count < 1) throw PlanError("case count must be at least 1");
  std::vector<int> eligible = eligible_blocks(table, scenario);
  if (!eligible.empty() && count < 2)
    throw PlanError("coverage needs at least 2 cases when removable blocks exist");
  if (!eligible.empty() && scenario.max_removed == 0)
    throw PlanError("coverage needs max_removed >= 1 when removable blocks exist");

  Rng rng = Rng::derive(seed, 0x706c616eULL);
  std::vector<ExecutionCase> cases;
  cases.reserve(count);
  for (int i = 0; i < count; ++i) cases.push_back(draw_case(rng, scenario, eligible, i, i > 0));

  std::set<int> covered;
  for (const auto& c : cases) covered.insert(c.removed.begin(), c.removed.end());
  int next = 0;
  for (int b : eligible) {
    if (covered.count(b)) continue;
    auto& removed = cases[1 + next % (count - 1)].removed;
    removed.insert(std::upper_bound(removed.begin(), removed.end(), b), b);
    ++next;
  }
  return cases;
}

std::vector<ExecutionCase> augment_cases(const BlockTable& table, const ScenarioSpec& scenario,
                                         int first_id, int count, std::uint64_t seed) {
  validate(scenario);
  std::vector<int> eligible = eligible_blocks(table, scenario);
  Rng rng = Rng::derive(seed, 0x61756778ULL, static_cast<std::uint64_t>(first_id));
  std::vector<ExecutionCase> cases;
  for (int i = 0; i < count; ++i) cases.push_back(draw_case(rng, scenario, eligible, first_id + i, true));
  return cases;
}

const char* to_string(RunKind k) {
  switch (k) {
    case RunKind::Path: return "path";
    case RunKind::Idle: return "idle";
    case RunKind::Measured: return "measured";
  }
  return "?";
}

RunSchedule schedule(const ExecutionCase& c, int repeats) {
  if (repeats < 1) throw PlanError("repeats must be at least 1, got " + std::to_string(repeats));
  RunSchedule s;
  s.case_id = c.id;
  s.repeats = repeats;
  s.runs.push_back({RunKind::Path, 0});
  for (int r = 0; r < repeats; ++r) s.runs.push_back({RunKind::Idle, r});
  for (int r = 0; r < repeats; ++r) s.runs.push_back({RunKind::Measured, r});
  return s;
}

std::string plan_to_json(const std::vector<ExecutionCase>& cases, const PlanMeta& meta, int indent) {
  using nlohmann::ordered_json;
  ordered_json arr = ordered_json::array();
  for (const auto& c : cases) {
    ordered_json inputs = ordered_json::array();
    for (const auto& e : c.inputs)
      inputs.push_back({{"t_ms", e.t_ms}, {"kind", e.kind}, {"payload", e.payload}});
    ordered_json j;
    j["id"] = c.id;
    j["scenario"] = c.scenario;
    j["inputs"] = std::move(inputs);
    j["removed"] = c.removed;
    j["duration_s"] = c.duration_s;
    arr.push_back(std::move(j));
  }
  ordered_json root;
  root["meta"] = {{"seed", meta.seed}, {"config_hash", meta.config_hash}};
  root["cases"] = std::move(arr);
  return root.dump(indent);
}

std::vector<ExecutionCase> plan_from_json(const std::string& text, PlanMeta* meta) {
  std::vector<ExecutionCase> cases;
  try {
    auto root = nlohmann::json::parse(text);
    if (meta && root.contains("meta")) {
      meta->seed = root["meta"].value("seed", std::uint64_t{0});
      meta->config_hash = root["meta"].value("config_hash", std::string());
    }
    for (const auto& j : root.at("cases")) {
      ExecutionCase c;
      c.id = j.at("id").get<int>();
      c.scenario = j.value("scenario", std::string());
      for (const auto& e : j.at("inputs"))
        c.inputs.push_back({e.at("t_ms").get<int>(), e.at("kind").get<std::string>(),
                            e.at("payload").get<std::vector<int>>()});
      c.removed = j.at("removed").get<std::vector<int>>();
      std::sort(c.removed.begin(), c.removed.end());
      c.duration_s = j.at("duration_s").get<double>();
      cases.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw PlanError(std::string("malformed plan JSON: ") + ex.what());
  }
  return cases;
}

}  // namespace emod
