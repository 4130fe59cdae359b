#include "emod/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "emod/error.hpp"
#include "emod/ops.hpp"
#include "json.hpp"

namespace emod {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

int GroundTruth::index_of(const std::string& id) const {
  auto it = std::find(op_ids.begin(), op_ids.end(), id);
  return it == op_ids.end() ? -1 : static_cast<int>(it - op_ids.begin());
}

double GroundTruth::cost(const std::string& id) const {
  int j = index_of(id);
  if (j < 0) throw DimensionError("ground truth has no operation '" + id + "'");
  return cost_j[j];
}

GroundTruth make_ground_truth(const std::vector<std::string>& op_ids, std::uint64_t seed,
                              const TruthOptions& o) {
  GroundTruth t;
  t.op_ids = op_ids;
  t.idle_w = o.idle_w;
  t.gc_rate_hz = o.gc_rate_hz;
  t.gc_cost_j = o.gc_cost_j;
  t.gc_time_s = o.gc_time_s;
  t.noise_sigma = o.noise_sigma;
  t.jitter_sigma_s = o.jitter_sigma_s;
  for (const auto& id : op_ids) {
    Rng rng = Rng::derive(seed, fnv1a(id), 0x7472757468ULL);
    double cost = rng.log_uniform(o.cost_min_j, o.cost_max_j);
    double power = rng.uniform(o.op_power_min_w, o.op_power_max_w);
    if (id == "BlockGoto_if") cost = 6.7e-6;
    if (id == "BlockGoto_for") cost = 4.1e-6;
    if (id == "BlockGoto_while") cost = 1.1e-6;
    double time = cost / power;
    if (id == op::kGC) {
      cost = o.gc_cost_j;
      time = o.gc_time_s;
    }
    t.cost_j.push_back(cost);
    t.time_s.push_back(time);
  }
  return t;
}

std::string truth_to_json(const GroundTruth& t, std::uint64_t seed, int indent) {
  nlohmann::ordered_json ops = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < t.op_ids.size(); ++j)
    ops.push_back({{"id", t.op_ids[j]}, {"cost_j", t.cost_j[j]}, {"time_s", t.time_s[j]}});
  nlohmann::ordered_json root;
  root["ops"] = std::move(ops);
  root["idle_w"] = t.idle_w;
  root["gc"] = {{"rate_hz", t.gc_rate_hz}, {"cost_j", t.gc_cost_j}, {"time_s", t.gc_time_s}};
  root["noise"] = {{"sigma", t.noise_sigma}, {"jitter_s", t.jitter_sigma_s}};
  root["meta"] = {{"seed", seed}};
  return root.dump(indent);
}

GroundTruth truth_from_json(const std::string& text) {
  GroundTruth t;
  try {
    auto root = nlohmann::json::parse(text);
    for (const auto& o : root.at("ops")) {
      t.op_ids.push_back(o.at("id").get<std::string>());
      t.cost_j.push_back(o.at("cost_j").get<double>());
      t.time_s.push_back(o.at("time_s").get<double>());
    }
    t.idle_w = root.at("idle_w").get<double>();
    t.gc_rate_hz = root.at("gc").at("rate_hz").get<double>();
    t.gc_cost_j = root.at("gc").at("cost_j").get<double>();
    t.gc_time_s = root.at("gc").at("time_s").get<double>();
    t.noise_sigma = root.at("noise").at("sigma").get<double>();
    t.jitter_sigma_s = root.at("noise").at("jitter_s").get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("malformed ground truth JSON: ") + ex.what());
  }
  return t;
}

// ---- power function -----------------------------------------------------------

PowerFunction::PowerFunction(const std::vector<std::int64_t>& counts, double duration_s, const GroundTruth& truth,
                             std::vector<GcEvent> gc)
    : gc_(std::move(gc)), idle_(truth.idle_w) {
  if (counts.size() != truth.op_ids.size())
    throw DimensionError("power function needs " + std::to_string(truth.op_ids.size()) + " counts, got " +
                         std::to_string(counts.size()));
  gc_time_ = truth.gc_time_s;
  gc_power_ = truth.gc_time_s > 0 ? truth.gc_cost_j / truth.gc_time_s : 0.0;
  double t = 0.0;
  double e = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] <= 0 || truth.op_ids[j] == op::kGC || truth.time_s[j] <= 0) continue;
    double span = static_cast<double>(counts[j]) * truth.time_s[j];
    double p = idle_ + truth.cost_j[j] / truth.time_s[j];
    t += span;
    e += span * p;
    ends_.push_back(t);
    powers_.push_back(p);
    cum_.push_back(e);
  }
  duration_ = std::max(duration_s, t);
}

PowerFunction PowerFunction::idle(double duration_s, const GroundTruth& truth) {
  return PowerFunction(std::vector<std::int64_t>(truth.op_ids.size(), 0), duration_s, truth);
}

double PowerFunction::power(double t) const {
  double p = idle_;
  auto it = std::upper_bound(ends_.begin(), ends_.end(), t);
  if (it != ends_.end()) p = powers_[static_cast<std::size_t>(it - ends_.begin())];
  for (const auto& g : gc_)
    if (t >= g.start_s && t < g.start_s + gc_time_) p += gc_power_;
  return p;
}

double PowerFunction::energy(double t) const {
  if (t <= 0) return 0.0;
  double e;
  auto k = static_cast<std::size_t>(std::upper_bound(ends_.begin(), ends_.end(), t) - ends_.begin());
  double start = k == 0 ? 0.0 : ends_[k - 1];
  double before = k == 0 ? 0.0 : cum_[k - 1];
  double p = k < ends_.size() ? powers_[k] : idle_;
  e = before + (t - start) * p;
  for (const auto& g : gc_) {
    double overlap = std::min(t, g.start_s + gc_time_) - g.start_s;
    if (overlap > 0) e += std::min(overlap, gc_time_) * gc_power_;
  }
  return e;
}

// ---- sensor -------------------------------------------------------------------

PowerTrace sample_power(const PowerFunction& f, const SensorOptions& sensor, double noise_sigma,
                        double jitter_sigma_s, Rng& rng) {
  if (!(sensor.rate_hz > 0)) throw DimensionError("sampling rate must be positive");
  double d = f.duration();
  PowerTrace trace;
  auto noisy = [&](double p) {
    if (noise_sigma > 0) p *= 1.0 + noise_sigma * rng.normal();
    return std::max(p, 0.0);
  };
  trace.t_s.push_back(0.0);
  trace.power_w.push_back(noisy(f.power(0.0)));
  double prev = 0.0;
  double prev_e = 0.0;
  auto push = [&](double t) {
    double p;
    if (sensor.mode == SensorMode::Averaging) {
      double e = f.energy(t);
      p = t > prev ? (e - prev_e) / (t - prev) : f.power(t);
      prev_e = e;
    } else {
      p = f.power(t);
    }
    trace.t_s.push_back(t);
    trace.power_w.push_back(noisy(p));
    prev = t;
  };
  double dt = 1.0 / sensor.rate_hz;
  auto k = static_cast<std::int64_t>(std::floor(d * sensor.rate_hz + 1e-9));
  for (std::int64_t i = 1; i <= k; ++i) {
    double nominal = static_cast<double>(i) * dt;
    if (nominal >= d - 1e-12 * std::max(1.0, d)) break;
    double t = nominal;
    if (jitter_sigma_s > 0) t += jitter_sigma_s * rng.normal();
    t = std::clamp(t, prev, d);
    push(t);
  }
  push(d);
  return trace;
}

PowerTrace synthesize_trace(const RunResult& result, const GroundTruth& truth, double rate_hz, std::uint64_t seed,
                            SensorMode mode) {
  if (result.tally.empty()) throw DimensionError("trace synthesis needs a run with an operation tally");
  double d = simulated_workload_time(result.tally, truth.time_s, result.duration_s);
  Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(result.case_id), 0x7472616365ULL);
  std::vector<GcEvent> gc;
  int n = rng.poisson(truth.gc_rate_hz * d);
  for (int i = 0; i < n; ++i) gc.push_back({rng.uniform(0.0, std::max(0.0, d - truth.gc_time_s))});
  PowerFunction f(result.tally, d, truth, std::move(gc));
  return sample_power(f, SensorOptions{rate_hz, mode}, truth.noise_sigma, truth.jitter_sigma_s, rng);
}

double integrate(const PowerTrace& trace) {
  if (trace.size() < 2) throw DimensionError("integration needs at least 2 samples");
  double e = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) e += trace.power_w[i] * (trace.t_s[i] - trace.t_s[i - 1]);
  return e;
}

std::string trace_to_csv(const PowerTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "t_s,power_w\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out << trace.t_s[i] << ',' << trace.power_w[i] << '\n';
  return out.str();
}

// ---- protocol -----------------------------------------------------------------

EnergyMeasurement measure_counts(int case_id, const std::vector<std::int64_t>& counts, double target_s,
                                 int repeats, const GroundTruth& truth, std::uint64_t seed,
                                 const SensorOptions& sensor) {
  if (repeats < 1) throw PlanError("repeats must be at least 1");
  EnergyMeasurement m;
  m.case_id = case_id;
  m.repeats = repeats;
  m.counts = counts;
  double d = simulated_workload_time(counts, truth.time_s, target_s);
  m.duration_s = d;
  auto cid = static_cast<std::uint64_t>(case_id);
  for (int r = 0; r < repeats; ++r) {
    auto rr = static_cast<std::uint64_t>(r);
    Rng idle_rng = Rng::derive(seed, cid, 1, rr);
    PowerFunction idle = PowerFunction::idle(d, truth);
    double e_idle = integrate(sample_power(idle, sensor, truth.noise_sigma, truth.jitter_sigma_s, idle_rng));

    Rng rng = Rng::derive(seed, cid, 2, rr);
    int n_gc = rng.poisson(truth.gc_rate_hz * d);
    std::vector<GcEvent> gc;
    for (int i = 0; i < n_gc; ++i) gc.push_back({rng.uniform(0.0, std::max(0.0, d - truth.gc_time_s))});
    PowerFunction f(counts, d, truth, std::move(gc));
    double e_meas = integrate(sample_power(f, sensor, truth.noise_sigma, truth.jitter_sigma_s, rng));

    m.idle_runs.push_back(e_idle);
    m.meas_runs.push_back(e_meas);
    m.per_repeat.push_back(e_meas - e_idle);
    m.gc_counts.push_back(n_gc);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  m.e_idle = mean(m.idle_runs);
  m.e_meas = mean(m.meas_runs);
  m.e_joules = m.e_meas - m.e_idle;
  double gc_total = 0.0;
  for (int g : m.gc_counts) gc_total += g;
  m.gc_mean = gc_total / repeats;
  if (repeats > 1) {
    double mu = mean(m.per_repeat);
    double ss = 0.0;
    for (double x : m.per_repeat) ss += (x - mu) * (x - mu);
    m.stderr_j = std::sqrt(ss / (repeats - 1)) / std::sqrt(static_cast<double>(repeats));
  }
  return m;
}

EnergyMeasurement measure_case(const Program& program, const BlockTable& table, const OpDictionary& dict,
                               const ExecutionCase& c, const RunSchedule& schedule, const GroundTruth& truth,
                               std::uint64_t seed, const MeasureOptions& options) {
  if (schedule.case_id != c.id) throw PlanError("schedule does not belong to case " + std::to_string(c.id));
  if (truth.op_ids != dict.op_ids()) throw DimensionError("ground truth and dictionary list different operations");
  RunOptions ro = options.run;
  ro.mode = RunMode::LogPath;
  RunResult path = run(program, table, dict.op_ids(), c, ro);
  std::vector<std::int64_t> counts = case_op_counts(dict.masked(c.removed), path.log);
  return measure_counts(c.id, counts, c.duration_s, schedule.repeats, truth, seed, options.sensor);
}

}  // namespace emod
