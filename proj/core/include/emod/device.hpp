#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emod/blocks.hpp"
#include "emod/opdict.hpp"
#include "emod/planner.hpp"
#include "emod/random.hpp"
#include "emod/runner.hpp"

namespace emod {

/// Hidden cost model of the simulated device.
struct GroundTruth {
  std::vector<std::string> op_ids;
  std::vector<double> cost_j;  // energy per execution
  std::vector<double> time_s;  // duration per execution
  double idle_w = 0.5;
  double gc_rate_hz = 0.25;
  double gc_cost_j = 2e-3;
  double gc_time_s = 2e-3;
  double noise_sigma = 0.0;     // relative Gaussian noise per sample
  double jitter_sigma_s = 0.0;  // sampling-instant jitter

  int index_of(const std::string& id) const;
  double cost(const std::string& id) const;
};

struct TruthOptions {
  double cost_min_j = 0.1e-6;
  double cost_max_j = 50e-6;
  double op_power_min_w = 1.5;  // power drawn above idle while an op executes
  double op_power_max_w = 2.5;
  double idle_w = 0.5;
  double gc_rate_hz = 0.25;
  double gc_cost_j = 2e-3;
  double gc_time_s = 2e-3;
  double noise_sigma = 0.0;
  double jitter_sigma_s = 0.0;
};

/// Published goto costs, log-uniform synthetic costs for every other op, and `Lib:GC` at the
/// configured GC cost. Per-op time is cost divided by a per-op power draw.
GroundTruth make_ground_truth(const std::vector<std::string>& op_ids, std::uint64_t seed,
                              const TruthOptions& options = {});

std::string truth_to_json(const GroundTruth& truth, std::uint64_t seed, int indent = 2);
GroundTruth truth_from_json(const std::string& text);

struct GcEvent {
  double start_s = 0.0;
};

/// Piecewise-constant true power: each op's execution span laid out back to back at
/// idle + cost/time, idle padding up to the duration, and GC bursts on top.
class PowerFunction {
 public:
  PowerFunction(const std::vector<std::int64_t>& counts, double duration_s, const GroundTruth& truth,
                std::vector<GcEvent> gc = {});

  /// Idle-only function of the given length.
  static PowerFunction idle(double duration_s, const GroundTruth& truth);

  double duration() const { return duration_; }
  double power(double t) const;
  /// ∫_0^t power.
  double energy(double t) const;
  double total_energy() const { return energy(duration_); }

 private:
  std::vector<double> ends_;    // segment end times
  std::vector<double> powers_;  // segment powers
  std::vector<double> cum_;     // energy at each segment end
  std::vector<GcEvent> gc_;
  double gc_power_ = 0.0;
  double gc_time_ = 0.0;
  double idle_ = 0.0;
  double duration_ = 0.0;
};

enum class SensorMode : std::uint8_t {
  Averaging,      // each sample reports mean power since the previous sample
  Instantaneous,  // each sample reports power at its instant
};

struct SensorOptions {
  double rate_hz = 30.0;
  SensorMode mode = SensorMode::Averaging;
};

struct PowerTrace {
  std::vector<double> t_s;
  std::vector<double> power_w;

  std::size_t size() const { return t_s.size(); }
};

/// Samples at 0, Δ, 2Δ, … (plus jitter) with a final sample at the end of the function.
/// Each sample is multiplied by (1 + N(0, noise_sigma)).
PowerTrace sample_power(const PowerFunction& f, const SensorOptions& sensor, double noise_sigma,
                        double jitter_sigma_s, Rng& rng);

/// Builds the power function of a run from its operation tally and samples it.
PowerTrace synthesize_trace(const RunResult& result, const GroundTruth& truth, double rate_hz, std::uint64_t seed,
                            SensorMode mode = SensorMode::Averaging);

/// Right-endpoint sum Σ_{i≥1} power(t_i)·(t_i − t_{i−1}). Throws DimensionError below 2 samples.
double integrate(const PowerTrace& trace);

std::string trace_to_csv(const PowerTrace& trace);

struct EnergyMeasurement {
  int case_id = 0;
  double e_joules = 0.0;  // e_meas − e_idle, kept even when negative
  double e_idle = 0.0;
  double e_meas = 0.0;
  int repeats = 0;
  double stderr_j = 0.0;
  std::vector<double> per_repeat;  // measured − idle, paired by repeat index
  std::vector<double> meas_runs;
  std::vector<double> idle_runs;
  std::vector<int> gc_counts;  // GC events per measured run
  double gc_mean = 0.0;
  double duration_s = 0.0;
  std::vector<std::int64_t> counts;  // operation executions from the path run
};

struct MeasureOptions {
  SensorOptions sensor;
  RunOptions run;
};

/// Path run (energy-free), then R idle and R measured simulations of equal duration.
EnergyMeasurement measure_case(const Program& program, const BlockTable& table, const OpDictionary& dict,
                               const ExecutionCase& c, const RunSchedule& schedule, const GroundTruth& truth,
                               std::uint64_t seed, const MeasureOptions& options = {});

/// Measurement from known counts, skipping the interpreter.
EnergyMeasurement measure_counts(int case_id, const std::vector<std::int64_t>& counts, double target_s,
                                 int repeats, const GroundTruth& truth, std::uint64_t seed,
                                 const SensorOptions& sensor);

}  // namespace emod
