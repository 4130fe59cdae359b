#include <cmath>

#include "doctest.h"
#include "emod/device.hpp"
#include "emod/error.hpp"
#include "emod/frontend.hpp"
#include "emod/opdict.hpp"
#include "emod/planner.hpp"
#include "emod/runner.hpp"
#include "util.hpp"

using namespace emod;

namespace {

GroundTruth two_op_truth() {
  GroundTruth t;
  t.op_ids = {"A", "B"};
  t.cost_j = {2e-6, 5e-6};
  t.time_s = {1e-6, 2e-6};
  t.idle_w = 0.5;
  t.gc_rate_hz = 0.0;
  return t;
}

}  // namespace

TEST_SUITE("device") {
  TEST_CASE("ground truth seeds the published goto costs") {
    GroundTruth t = make_ground_truth({"Addition_int_int", "BlockGoto_for", "BlockGoto_if", "BlockGoto_while", "Lib:GC"}, 42);
    CHECK(t.cost("BlockGoto_if") == 6.7e-6);
    CHECK(t.cost("BlockGoto_for") == 4.1e-6);
    CHECK(t.cost("BlockGoto_while") == 1.1e-6);
    CHECK(t.cost("Lib:GC") == TruthOptions{}.gc_cost_j);
    double a = t.cost("Addition_int_int");
    CHECK(a >= 0.1e-6);
    CHECK(a <= 50e-6);
    for (std::size_t j = 0; j < t.op_ids.size(); ++j) {
      CHECK(t.cost_j[j] >= 0);
      CHECK(t.time_s[j] > 0);
    }
    CHECK(t.idle_w > 0);
    CHECK_THROWS_AS(t.cost("nope"), DimensionError);
  }

  TEST_CASE("truth costs do not depend on which other ops exist") {
    GroundTruth a = make_ground_truth({"Addition_int_int", "Not"}, 7);
    GroundTruth b = make_ground_truth({"Assign_int_int", "Not"}, 7);
    CHECK(a.cost("Not") == b.cost("Not"));
  }

  TEST_CASE("truth JSON round-trips") {
    GroundTruth t = make_ground_truth({"Addition_int_int", "BlockGoto_for", "Lib:GC"}, 3);
    GroundTruth back = truth_from_json(truth_to_json(t, 3));
    CHECK(back.op_ids == t.op_ids);
    CHECK(back.cost_j == t.cost_j);
    CHECK(back.time_s == t.time_s);
    CHECK(back.idle_w == t.idle_w);
  }

  TEST_CASE("idle trace reads idle power everywhere") {
    GroundTruth t = two_op_truth();
    Rng rng(1);
    PowerTrace tr = sample_power(PowerFunction::idle(10.0, t), SensorOptions{30.0, SensorMode::Averaging}, 0.0, 0.0, rng);
    CHECK(std::abs(static_cast<int>(tr.size()) - 301) <= 1);
    for (double p : tr.power_w) CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
    for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.t_s[i] >= tr.t_s[i - 1]);
  }

  TEST_CASE("right-endpoint sums on simple traces") {
    PowerTrace constant;
    for (int i = 0; i <= 10; ++i) {
      constant.t_s.push_back(i / 30.0);
      constant.power_w.push_back(2.0);
    }
    CHECK(integrate(constant) == doctest::Approx(2.0 * 10.0 / 30.0).epsilon(1e-12));

    PowerTrace single{{0.0, 1.0}, {7.0, 3.0}};
    CHECK(integrate(single) == 3.0);

    PowerTrace ramp;
    for (int i = 0; i <= 30; ++i) {
      ramp.t_s.push_back(i / 30.0);
      ramp.power_w.push_back(i / 30.0);
    }
    CHECK(std::abs(integrate(ramp) - 0.5) <= 1.0 / 60.0 + 1e-12);

    CHECK_THROWS_AS(integrate(PowerTrace{{0.0}, {1.0}}), DimensionError);
  }

  TEST_CASE("averaging sensor integrates a workload exactly") {
    GroundTruth t = two_op_truth();
    PowerFunction f({100000, 50000}, 2.0, t);
    Rng rng(5);
    PowerTrace tr = sample_power(f, SensorOptions{30.0, SensorMode::Averaging}, 0.0, 0.0, rng);
    double analytic = 100000 * 2e-6 + 50000 * 5e-6 + 0.5 * 2.0;
    CHECK(integrate(tr) == doctest::Approx(analytic).epsilon(1e-12));
    CHECK(f.total_energy() == doctest::Approx(analytic).epsilon(1e-12));
  }

  TEST_CASE("instantaneous sampling is off by at most one sample of boundary error") {
    GroundTruth t = two_op_truth();
    PowerFunction f({100000, 50000}, 2.0, t);
    Rng rng(5);
    PowerTrace tr = sample_power(f, SensorOptions{30.0, SensorMode::Instantaneous}, 0.0, 0.0, rng);
    double analytic = f.total_energy();
    double peak = 0.5 + 2.5;
    CHECK(std::abs(integrate(tr) - analytic) <= 2 * peak / 30.0);
  }

  TEST_CASE("noise-free measurement recovers workload and GC energy") {
    GroundTruth t = two_op_truth();
    t.gc_rate_hz = 2.0;
    t.gc_cost_j = 1e-3;
    t.gc_time_s = 1e-3;
    EnergyMeasurement m = measure_counts(3, {200000, 10000}, 3.0, 4, t, 42, SensorOptions{});
    REQUIRE(m.per_repeat.size() == 4);
    double work = 200000 * 2e-6 + 10000 * 5e-6;
    for (int r = 0; r < 4; ++r)
      CHECK(m.per_repeat[r] == doctest::Approx(work + m.gc_counts[r] * 1e-3).epsilon(1e-9));
    CHECK(m.e_joules == doctest::Approx(m.e_meas - m.e_idle).epsilon(1e-12));
    CHECK(m.repeats == 4);
    CHECK(m.case_id == 3);
  }

  TEST_CASE("zero-cost truth measures near zero") {
    GroundTruth t = two_op_truth();
    t.cost_j = {0.0, 0.0};
    t.noise_sigma = 0.05;
    EnergyMeasurement m = measure_counts(0, {1000, 1000}, 2.0, 10, t, 9, SensorOptions{});
    CHECK(std::abs(m.e_joules) <= 4 * m.stderr_j + 1e-12);
  }

  TEST_CASE("negative workload estimates are kept") {
    GroundTruth t = two_op_truth();
    t.cost_j = {0.0, 0.0};
    t.noise_sigma = 0.2;
    bool negative = false;
    for (std::uint64_t s = 0; s < 20 && !negative; ++s)
      negative = measure_counts(0, {1, 1}, 1.0, 1, t, s, SensorOptions{}).e_joules < 0;
    CHECK(negative);
  }

  TEST_CASE("measure_case agrees with measure_counts on the path-run counts") {
    Program p = testing::load_fixture("game_loop.mj");
    BlockTable tb = divide_blocks(p);
    OpDictionary d = build_dictionary(p, tb);
    GroundTruth truth = make_ground_truth(d.op_ids(), 42);
    ScenarioSpec sc;
    auto cases = plan_cases(tb, sc, 2, 42);
    const auto& c = cases[1];
    EnergyMeasurement a = measure_case(p, tb, d, c, schedule(c, 3), truth, 7);
    RunResult r = run(p, tb, d.op_ids(), c);
    EnergyMeasurement b = measure_counts(c.id, case_op_counts(d.masked(c.removed), r.log), c.duration_s, 3, truth, 7,
                                         SensorOptions{});
    CHECK(a.e_joules == b.e_joules);
    CHECK(a.counts == b.counts);
  }

  TEST_CASE("trace CSV header") {
    PowerTrace tr{{0.0, 0.5}, {1.0, 1.0}};
    std::string csv = trace_to_csv(tr);
    CHECK(csv.rfind("t_s,power_w\n", 0) == 0);
  }

  TEST_CASE("measurement is deterministic under a seed") {
    GroundTruth t = two_op_truth();
    t.noise_sigma = 0.05;
    EnergyMeasurement a = measure_counts(1, {5000, 7000}, 2.0, 10, t, 11, SensorOptions{});
    EnergyMeasurement b = measure_counts(1, {5000, 7000}, 2.0, 10, t, 11, SensorOptions{});
    CHECK(a.per_repeat == b.per_repeat);
    CHECK(a.idle_runs == b.idle_runs);
  }
}
