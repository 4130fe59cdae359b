#include "emod/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "emod/error.hpp"
#include "json.hpp"
#include "toml.hpp"

namespace emod {

namespace {

namespace fs = std::filesystem;

class Reader {
 public:
  Reader(const toml::table& root, std::string base) : root_(root), base_(std::move(base)) {}

  const toml::table* table(const char* name) {
    const toml::node* n = root_.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) throw ConfigError(std::string("'") + name + "' must be a table");
    return n->as_table();
  }

  void allow(const toml::table* t, const std::string& where, std::initializer_list<const char*> keys) {
    if (!t) return;
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : *t)
      if (!ok.count(std::string(k.str())))
        throw ConfigError("unknown key '" + where + (where.empty() ? "" : ".") + std::string(k.str()) + "'");
  }

  template <typename T>
  void get(const toml::table* t, const std::string& where, const char* key, T& out) {
    if (!t) return;
    const toml::node* n = t->get(key);
    if (!n) return;
    std::optional<T> v;
    if constexpr (std::is_same_v<T, bool>) {
      v = n->value_exact<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      v = n->value_exact<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      v = n->value<double>();
    } else {
      auto i = n->value_exact<std::int64_t>();
      if (i) v = static_cast<T>(*i);
    }
    if (!v) throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
    out = *v;
  }

  std::string path(const std::string& p) const {
    if (p.empty()) return p;
    fs::path fp(p);
    if (fp.is_absolute()) return p;
    return (fs::path(base_) / fp).lexically_normal().string();
  }

 private:
  const toml::table& root_;
  std::string base_;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  Reader r(root, base_dir);
  RunConfig c;
  r.allow(&root, "", {"seed", "program", "output", "scenario", "plan", "device", "protocol", "fit", "report", "run"});
  if (const toml::node* s = root.get("seed")) {
    auto v = s->value_exact<std::int64_t>();
    if (!v || *v < 0) throw ConfigError("config key 'seed' must be a non-negative integer");
    c.seed = static_cast<std::uint64_t>(*v);
  }

  auto* program = r.table("program");
  r.allow(program, "program", {"path", "plan"});
  r.get(program, "program", "path", c.program_path);
  r.get(program, "program", "plan", c.plan_path);
  c.program_path = r.path(c.program_path);
  c.plan_path = r.path(c.plan_path);

  auto* output = r.table("output");
  r.allow(output, "output", {"dir"});
  r.get(output, "output", "dir", c.output_dir);

  auto* sc = r.table("scenario");
  r.allow(sc, "scenario",
          {"name", "min_duration_s", "max_duration_s", "fps", "min_taps", "max_taps", "min_keys", "max_keys",
           "screen_width", "screen_height", "key_codes", "max_removed", "keep_blocks", "protocol_fidelity",
           "fidelity_duration_s"});
  ScenarioSpec& s = c.scenario;
  r.get(sc, "scenario", "name", s.name);
  r.get(sc, "scenario", "min_duration_s", s.min_duration_s);
  r.get(sc, "scenario", "max_duration_s", s.max_duration_s);
  r.get(sc, "scenario", "fps", s.fps);
  r.get(sc, "scenario", "min_taps", s.min_taps);
  r.get(sc, "scenario", "max_taps", s.max_taps);
  r.get(sc, "scenario", "min_keys", s.min_keys);
  r.get(sc, "scenario", "max_keys", s.max_keys);
  r.get(sc, "scenario", "screen_width", s.screen_width);
  r.get(sc, "scenario", "screen_height", s.screen_height);
  r.get(sc, "scenario", "key_codes", s.key_codes);
  r.get(sc, "scenario", "max_removed", s.max_removed);
  r.get(sc, "scenario", "protocol_fidelity", s.protocol_fidelity);
  r.get(sc, "scenario", "fidelity_duration_s", s.fidelity_duration_s);
  if (sc) {
    if (const toml::node* kb = sc->get("keep_blocks")) {
      const toml::array* arr = kb->as_array();
      if (!arr) throw ConfigError("config key 'scenario.keep_blocks' must be an array of block ids");
      for (const auto& el : *arr) {
        auto v = el.value_exact<std::int64_t>();
        if (!v) throw ConfigError("config key 'scenario.keep_blocks' must hold integers");
        s.keep_blocks.push_back(static_cast<int>(*v));
      }
    }
  }

  auto* plan = r.table("plan");
  r.allow(plan, "plan", {"cases", "min_rank_fraction", "max_augment_rounds", "augment_batch"});
  r.get(plan, "plan", "cases", c.cases);
  r.get(plan, "plan", "min_rank_fraction", c.min_rank_fraction);
  r.get(plan, "plan", "max_augment_rounds", c.max_augment_rounds);
  r.get(plan, "plan", "augment_batch", c.augment_batch);

  auto* dev = r.table("device");
  r.allow(dev, "device",
          {"rate_hz", "sensor", "idle_w", "noise_sigma", "jitter_s", "cost_min_j", "cost_max_j", "op_power_min_w",
           "op_power_max_w", "gc_rate_hz", "gc_cost_j", "gc_time_s"});
  r.get(dev, "device", "rate_hz", c.rate_hz);
  std::string sensor = "averaging";
  r.get(dev, "device", "sensor", sensor);
  if (sensor == "averaging")
    c.sensor = SensorMode::Averaging;
  else if (sensor == "instantaneous")
    c.sensor = SensorMode::Instantaneous;
  else
    throw ConfigError("config key 'device.sensor' must be \"averaging\" or \"instantaneous\"");
  TruthOptions& t = c.truth;
  r.get(dev, "device", "idle_w", t.idle_w);
  r.get(dev, "device", "noise_sigma", t.noise_sigma);
  r.get(dev, "device", "jitter_s", t.jitter_sigma_s);
  r.get(dev, "device", "cost_min_j", t.cost_min_j);
  r.get(dev, "device", "cost_max_j", t.cost_max_j);
  r.get(dev, "device", "op_power_min_w", t.op_power_min_w);
  r.get(dev, "device", "op_power_max_w", t.op_power_max_w);
  r.get(dev, "device", "gc_rate_hz", t.gc_rate_hz);
  r.get(dev, "device", "gc_cost_j", t.gc_cost_j);
  r.get(dev, "device", "gc_time_s", t.gc_time_s);

  auto* proto = r.table("protocol");
  r.allow(proto, "protocol", {"repeats"});
  r.get(proto, "protocol", "repeats", c.repeats);

  auto* fit = r.table("fit");
  r.allow(fit, "fit",
          {"alpha", "max_iters", "epsilon", "restarts", "init_lo", "init_hi", "nonneg", "standardize", "backoff",
           "accelerate", "rounds"});
  FitConfig& f = c.fit;
  r.get(fit, "fit", "alpha", f.alpha);
  r.get(fit, "fit", "max_iters", f.max_iters);
  r.get(fit, "fit", "epsilon", f.epsilon);
  r.get(fit, "fit", "restarts", f.restarts);
  r.get(fit, "fit", "init_lo", f.init_lo);
  r.get(fit, "fit", "init_hi", f.init_hi);
  r.get(fit, "fit", "nonneg", f.nonneg);
  r.get(fit, "fit", "standardize", f.standardize);
  r.get(fit, "fit", "backoff", f.backoff);
  r.get(fit, "fit", "accelerate", f.accelerate);
  r.get(fit, "fit", "rounds", c.rounds);

  auto* rep = r.table("report");
  r.allow(rep, "report", {"svg", "top_k", "variants", "variant_costs"});
  r.get(rep, "report", "svg", c.svg);
  r.get(rep, "report", "top_k", c.top_k);
  if (rep) {
    if (const toml::node* vs = rep->get("variants")) {
      const toml::array* arr = vs->as_array();
      if (!arr) throw ConfigError("config key 'report.variants' must be an array of paths");
      for (const auto& el : *arr) {
        auto v = el.value_exact<std::string>();
        if (!v) throw ConfigError("config key 'report.variants' must hold strings");
        c.variants.push_back(r.path(*v));
      }
    }
    if (const toml::node* vc = rep->get("variant_costs")) {
      const toml::table* tb = vc->as_table();
      if (!tb) throw ConfigError("config key 'report.variant_costs' must be a table");
      for (const auto& [k, v] : *tb) {
        auto d = v.value<double>();
        if (!d) throw ConfigError("config key 'report.variant_costs." + std::string(k.str()) + "' must be a number");
        c.variant_costs[std::string(k.str())] = *d;
      }
    }
  }

  auto* run = r.table("run");
  r.allow(run, "run", {"jobs", "log_removed", "full_log"});
  r.get(run, "run", "jobs", c.jobs);
  r.get(run, "run", "log_removed", c.log_removed);
  r.get(run, "run", "full_log", c.full_log);
  c.fit.seed = c.seed;
  c.fit.jobs = c.jobs;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string base = fs::path(path).parent_path().string();
  return parse_config(ss.str(), base.empty() ? "." : base);
}

std::string normalized_config(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["program"] = fs::path(c.program_path).filename().string();
  j["plan"] = fs::path(c.plan_path).filename().string();
  const ScenarioSpec& s = c.scenario;
  j["scenario"] = {{"name", s.name},
                   {"min_duration_s", s.min_duration_s},
                   {"max_duration_s", s.max_duration_s},
                   {"fps", s.fps},
                   {"min_taps", s.min_taps},
                   {"max_taps", s.max_taps},
                   {"min_keys", s.min_keys},
                   {"max_keys", s.max_keys},
                   {"screen_width", s.screen_width},
                   {"screen_height", s.screen_height},
                   {"key_codes", s.key_codes},
                   {"max_removed", s.max_removed},
                   {"keep_blocks", s.keep_blocks},
                   {"protocol_fidelity", s.protocol_fidelity},
                   {"fidelity_duration_s", s.fidelity_duration_s}};
  j["plan_policy"] = {{"cases", c.cases},
                      {"min_rank_fraction", c.min_rank_fraction},
                      {"max_augment_rounds", c.max_augment_rounds},
                      {"augment_batch", c.augment_batch}};
  const TruthOptions& t = c.truth;
  j["device"] = {{"rate_hz", c.rate_hz},
                 {"sensor", c.sensor == SensorMode::Averaging ? "averaging" : "instantaneous"},
                 {"idle_w", t.idle_w},
                 {"noise_sigma", t.noise_sigma},
                 {"jitter_s", t.jitter_sigma_s},
                 {"cost_min_j", t.cost_min_j},
                 {"cost_max_j", t.cost_max_j},
                 {"op_power_min_w", t.op_power_min_w},
                 {"op_power_max_w", t.op_power_max_w},
                 {"gc_rate_hz", t.gc_rate_hz},
                 {"gc_cost_j", t.gc_cost_j},
                 {"gc_time_s", t.gc_time_s}};
  j["repeats"] = c.repeats;
  const FitConfig& f = c.fit;
  j["fit"] = {{"alpha", f.alpha},     {"max_iters", f.max_iters},     {"epsilon", f.epsilon},
              {"restarts", f.restarts}, {"init_lo", f.init_lo},        {"init_hi", f.init_hi},
              {"nonneg", f.nonneg},   {"standardize", f.standardize}, {"backoff", f.backoff},
              {"accelerate", f.accelerate}, {"rounds", c.rounds}};
  std::vector<std::string> variants;
  for (const auto& v : c.variants) variants.push_back(fs::path(v).filename().string());
  j["report"] = {{"top_k", c.top_k}, {"variants", variants}, {"variant_costs", c.variant_costs}};
  j["run"] = {{"log_removed", c.log_removed}};
  return j.dump();
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : normalized_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace emod
