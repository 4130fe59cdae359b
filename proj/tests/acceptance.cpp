// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are fixed here.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "emod/accounting.hpp"
#include "emod/config.hpp"
#include "emod/device.hpp"
#include "emod/frontend.hpp"
#include "emod/opdict.hpp"
#include "emod/pipeline.hpp"
#include "emod/planner.hpp"
#include "emod/random.hpp"
#include "emod/regress.hpp"
#include "emod/runner.hpp"
#include "fuzz.hpp"
#include "util.hpp"

using namespace emod;
namespace fs = std::filesystem;

namespace tol {
constexpr double kTruthRel = 0.01;
constexpr double kOracleRel = 0.001;
constexpr double kRecoverySeconds = 60.0;
constexpr double kMaxValNmae = 0.163;
constexpr double kMinValR = 0.81;
constexpr double kCvSeconds = 300.0;
constexpr int kFuzzPairs = 200;
constexpr double kExactRel = 1e-12;
constexpr double kGradRel = 1e-6;
constexpr int kGradInstances = 50;
constexpr int kProtocolSeeds = 200;
constexpr double kBiasSe = 3.0;
constexpr double kSeRatio = std::sqrt(10.0);
constexpr double kSeRatioTol = 0.5;
constexpr std::int64_t kOriginalGotos = 704;
constexpr std::int64_t kUnrolledGotos = 88;
}  // namespace tol

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Rows of a CSV artifact, comment lines dropped, header first.
std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("emod-acceptance-" + name);
  fs::remove_all(p);
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig demo_config(const std::string& out) {
  RunConfig c = load_config(testing::fixture("demo.toml"));
  c.output_dir = out;
  c.jobs = 1;
  c.fit.jobs = 1;
  return c;
}

Outcome exact_recovery() {
  auto t0 = std::chrono::steady_clock::now();
  fs::path dir = scratch("exact");
  RunConfig c = demo_config(dir.string());
  c.truth.noise_sigma = 0.0;
  c.truth.jitter_sigma_s = 0.0;
  c.sensor = SensorMode::Averaging;
  c.repeats = 1;
  c.min_rank_fraction = 1.0;
  c.fit.epsilon = 1e-15;
  c.fit.max_iters = 1000000;
  Pipeline p(c);
  for (Stage s : {Stage::Parse, Stage::Blocks, Stage::Dict, Stage::Plan, Stage::Run, Stage::Measure, Stage::Fit})
    p.run(s);

  // Design matrix rebuilt from the artifacts: counts with the GC column set to its measured mean.
  auto counts = read_csv(p.artifact("counts.csv"));
  auto gc = read_csv(p.artifact("gc.csv"));
  auto meas = read_csv(p.artifact("measurements.csv"));
  std::vector<std::string> ops(counts[0].begin() + 1, counts[0].end());
  const int l = static_cast<int>(ops.size());
  const int m = static_cast<int>(counts.size()) - 1;
  std::map<std::string, double> gc_mean, energy;
  for (std::size_t i = 1; i < gc.size(); ++i) gc_mean[gc[i][0]] = std::stod(gc[i][1]);
  for (std::size_t i = 1; i < meas.size(); ++i) energy[meas[i][0]] = std::stod(meas[i][1]);
  Eigen::MatrixXd n(m, l);
  Eigen::VectorXd e(m);
  for (int i = 0; i < m; ++i) {
    const auto& row = counts[static_cast<std::size_t>(i) + 1];
    for (int j = 0; j < l; ++j) n(i, j) = ops[j] == "Lib:GC" ? gc_mean.at(row[0]) : std::stod(row[j + 1]);
    e(i) = energy.at(row[0]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(n);
  int rank = static_cast<int>(qr.rank());
  Eigen::VectorXd oracle = qr.solve(e);

  CostModel model = model_from_json(slurp(p.artifact("model.json")));
  GroundTruth truth = truth_from_json(slurp(p.artifact("truth.json")));
  double worst_truth = 0.0, worst_oracle = 0.0;
  std::string worst_op;
  for (int j = 0; j < l; ++j) {
    double est = model.cost_j.at(j);
    double t = truth.cost(ops[j]);
    double rt = std::abs(est - t) / std::abs(t);
    double ro = std::abs(est - oracle(j)) / std::abs(oracle(j));
    if (rt > worst_truth) {
      worst_truth = rt;
      worst_op = ops[j];
    }
    worst_oracle = std::max(worst_oracle, ro);
  }
  double secs = seconds_since(t0);
  bool ok = m >= l + 20 && rank == l && worst_truth <= tol::kTruthRel && worst_oracle <= tol::kOracleRel &&
            secs < tol::kRecoverySeconds;
  fs::remove_all(dir);
  return {ok, fmt("m=%d l=%d rank=%d max rel err vs truth %.3g (%s), vs LS %.3g, %.1f s", m, l, rank, worst_truth,
                  worst_op.c_str(), worst_oracle, secs)};
}

Outcome noisy_cross_validation() {
  auto t0 = std::chrono::steady_clock::now();
  fs::path dir = scratch("cv");
  RunConfig c = demo_config(dir.string());
  c.truth.noise_sigma = 0.05;
  c.rate_hz = 30.0;
  c.repeats = 10;
  c.cases = 150;
  c.rounds = 4;
  Pipeline p(c);
  for (Stage s : {Stage::Parse, Stage::Blocks, Stage::Dict, Stage::Plan, Stage::Run, Stage::Measure, Stage::Validate})
    p.run(s);
  auto rows = read_csv(p.artifact("metrics.csv"));
  double secs = seconds_since(t0);
  bool ok = rows.size() == 5 && secs < tol::kCvSeconds;
  std::string detail;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double val_r = std::stod(rows[i][2]);
    double val_nmae = std::stod(rows[i][4]);
    ok = ok && val_nmae <= tol::kMaxValNmae && val_r >= tol::kMinValR;
    detail += fmt("round %s nmae=%.4f r=%.4f; ", rows[i][0].c_str(), val_nmae, val_r);
  }
  fs::remove_all(dir);
  return {ok, detail + fmt("%.1f s", secs)};
}

Outcome counting_oracle() {
  int mismatches = 0, pairs = 0;
  for (std::uint64_t seed = 0; pairs < tol::kFuzzPairs; ++seed) {
    Program p = parse(testing::random_program(1000 + seed));
    BlockTable t = divide_blocks(p);
    OpDictionary d = build_dictionary(p, t);
    ScenarioSpec sc;
    sc.min_duration_s = 0.2;
    sc.max_duration_s = 0.5;
    auto cases = plan_cases(t, sc, 2, seed);
    const ExecutionCase& c = cases.back();
    RunOptions o;
    o.mode = RunMode::TallyOracle;
    RunResult r = run(p, t, d.op_ids(), c, o);
    if (case_op_counts(d.masked(c.removed), r.log) != r.tally) ++mismatches;
    ++pairs;
  }
  return {mismatches == 0, fmt("%d pairs, %d mismatches", pairs, mismatches)};
}

Outcome integration() {
  Rng rng(7);
  double worst_step = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    double dt = 1.0 / static_cast<double>(rng.uniform_int(10, 1000));
    int samples = static_cast<int>(rng.uniform_int(2, 400));
    // Levels held over runs of whole intervals; the level on (t_{k-1}, t_k] is read at t_k.
    PowerTrace tr;
    tr.t_s.push_back(0.0);
    tr.power_w.push_back(rng.uniform(0.0, 5.0));
    ExactSum analytic;
    double level = rng.uniform(0.0, 5.0);
    for (int k = 1; k < samples; ++k) {
      if (rng.uniform() < 0.2) level = rng.uniform(0.0, 5.0);
      double t0 = (k - 1) * dt, t1 = k * dt;
      tr.t_s.push_back(t1);
      tr.power_w.push_back(level);
      analytic.add_product(level, t1 - t0);
    }
    double got = integrate(tr);
    double want = analytic.value();
    worst_step = std::max(worst_step, std::abs(got - want) / std::max(std::abs(want), 1e-300));
  }

  double worst_ramp = 0.0;
  bool ramp_ok = true;
  for (double rate : {10.0, 30.0, 100.0}) {
    for (double slope : {0.5, 1.0, 4.0}) {
      double dt = 1.0 / rate;
      PowerTrace tr;
      int n = static_cast<int>(rate);
      for (int k = 0; k <= n; ++k) {
        tr.t_s.push_back(k * dt);
        tr.power_w.push_back(slope * k * dt);
      }
      for (int k = 1; k <= n; ++k) {
        PowerTrace one{{tr.t_s[k - 1], tr.t_s[k]}, {tr.power_w[k - 1], tr.power_w[k]}};
        double exact = 0.5 * slope * (tr.t_s[k] * tr.t_s[k] - tr.t_s[k - 1] * tr.t_s[k - 1]);
        double dt_k = tr.t_s[k] - tr.t_s[k - 1];
        // error per interval, as average power over the interval
        double err = std::abs(integrate(one) - exact) / dt_k;
        double bound = slope * dt_k / 2.0;
        worst_ramp = std::max(worst_ramp, err / bound);
        ramp_ok = ramp_ok && err <= bound * (1.0 + 1e-9);
      }
      double total = std::abs(integrate(tr) - 0.5 * slope);
      ramp_ok = ramp_ok && total <= slope * dt / 2.0 * (1.0 + 1e-9);
    }
  }
  bool ok = worst_step <= tol::kExactRel && ramp_ok;
  return {ok, fmt("piecewise-constant max rel err %.3g, ramp worst err/bound %.6f", worst_step, worst_ramp)};
}

Outcome gradient_check() {
  double worst = 0.0;
  for (int inst = 0; inst < tol::kGradInstances; ++inst) {
    Rng rng = Rng::derive(11, static_cast<std::uint64_t>(inst));
    int m = static_cast<int>(rng.uniform_int(1, 20));
    int l = static_cast<int>(rng.uniform_int(1, 20));
    Eigen::MatrixXd n(m, l);
    Eigen::VectorXd cost(l), e(m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < l; ++j) n(i, j) = static_cast<double>(rng.uniform_int(0, 50));
    for (int j = 0; j < l; ++j) cost(j) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < m; ++i) e(i) = rng.uniform(-10.0, 10.0);
    Eigen::VectorXd g = gradient(n, cost, e);
    for (int j = 0; j < l; ++j) {
      // J is quadratic, so central differences are exact up to rounding.
      double h = 1e-3;
      Eigen::VectorXd up = cost, down = cost;
      up(j) += h;
      down(j) -= h;
      double fd = (loss(n, up, e) - loss(n, down, e)) / (2.0 * h);
      double scale = std::max(std::abs(g(j)), g.lpNorm<Eigen::Infinity>() * 1e-3);
      if (scale == 0.0) scale = 1.0;
      worst = std::max(worst, std::abs(fd - g(j)) / scale);
    }
  }
  return {worst <= tol::kGradRel, fmt("%d instances, max rel diff %.3g", tol::kGradInstances, worst)};
}

Outcome protocol_statistics() {
  GroundTruth truth;
  truth.op_ids = {"A", "B", "C"};
  truth.cost_j = {3e-6, 11e-6, 0.7e-6};
  truth.time_s = {1e-6, 3e-6, 0.5e-6};
  truth.idle_w = 0.5;
  truth.noise_sigma = 0.05;
  truth.gc_rate_hz = 0.0;
  std::vector<std::int64_t> counts{20000, 5000, 60000};
  double want = 20000 * 3e-6 + 5000 * 11e-6 + 60000 * 0.7e-6;
  SensorOptions sensor{30.0, SensorMode::Averaging};

  auto stats = [&](int repeats, double* mean, double* sd) {
    std::vector<double> v;
    for (int s = 0; s < tol::kProtocolSeeds; ++s)
      v.push_back(measure_counts(0, counts, 3.0, repeats, truth, 5000 + static_cast<std::uint64_t>(s), sensor).e_joules);
    double mu = 0.0;
    for (double x : v) mu += x;
    mu /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    *mean = mu;
    *sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  double mean1, sd1, mean10, sd10;
  stats(1, &mean1, &sd1);
  stats(10, &mean10, &sd10);
  double se10 = sd10 / std::sqrt(static_cast<double>(tol::kProtocolSeeds));
  double z = std::abs(mean10 - want) / se10;
  double ratio = sd1 / sd10;
  bool ok = z <= tol::kBiasSe && std::abs(ratio - tol::kSeRatio) <= tol::kSeRatioTol;
  return {ok, fmt("bias %.2f SE (truth %.6g J, mean %.6g J), SE ratio %.3f", z, want, mean10, ratio)};
}

Outcome conservation() {
  int fixtures = 0, failures = 0;
  for (const char* name : {"game_loop.mj", "blit_original.mj", "blit_licm.mj", "blit_unrolled.mj", "blit_library.mj"}) {
    Program p = testing::load_fixture(name);
    BlockTable t = divide_blocks(p);
    OpDictionary d = build_dictionary(p, t);
    GroundTruth truth = make_ground_truth(d.op_ids(), 42);
    CostModel model;
    model.op_ids = truth.op_ids;
    model.cost_j = truth.cost_j;
    ScenarioSpec sc;
    auto cases = plan_cases(t, sc, 3, 42);
    for (const auto& c : cases) {
      RunResult r = run(p, t, d.op_ids(), c);
      OpDictionary masked = d.masked(c.removed);
      Conservation cons = check_conservation(model, masked, r.log);
      BlockBreakdown b = block_breakdown(model, p, t, masked, r.log);
      bool ok = cons.op_view_j == cons.block_view_j && cons.block_view_j == cons.dot_j && b.total_j == cons.dot_j;
      for (const auto& row : b.rows) ok = ok && row.per3000_j == 3000.0 * row.single_j;
      if (!ok) ++failures;
    }
    ++fixtures;
  }
  return {failures == 0, fmt("%d fixtures, %d failing cases", fixtures, failures)};
}

Outcome refactoring() {
  RunConfig c = load_config(testing::fixture("demo.toml"));
  std::vector<Program> programs;
  std::vector<std::string> names;
  for (const auto& path : c.variants) {
    programs.push_back(parse_file(path));
    names.push_back(fs::path(path).stem().string());
  }
  std::map<std::string, int> at;
  for (std::size_t i = 0; i < names.size(); ++i) at[names[i]] = static_cast<int>(i);
  const Program& orig = programs.at(at.at("blit_original"));
  OpDictionary d = build_dictionary(orig, divide_blocks(orig));
  GroundTruth truth = make_ground_truth(d.op_ids(), c.seed);
  CostModel model;
  model.op_ids = truth.op_ids;
  model.cost_j = truth.cost_j;
  std::vector<VariantInput> inputs;
  for (std::size_t i = 0; i < programs.size(); ++i) inputs.push_back({names[i], &programs[i]});
  auto rows = compare_variants(model, inputs, ExecutionCase{}, c.variant_costs);
  std::map<std::string, const VariantRow*> by;
  for (const auto& r : rows) by[r.name] = &r;
  const VariantRow& o = *by.at("blit_original");
  const VariantRow& u = *by.at("blit_unrolled");
  const VariantRow& lib = *by.at("blit_library");
  std::int64_t go = o.counts.at("BlockGoto_for"), gu = u.counts.at("BlockGoto_for");

  // The library call replaces one get and one put per element.
  std::int64_t elements = o.counts.at("Lib:FloatBuffer.put");
  double per_element = truth.cost("Lib:FloatBuffer.get") + truth.cost("Lib:FloatBuffer.put") +
                       truth.cost("Parameter_int") + truth.cost("Parameter_float");
  double library_cost = 0.0;
  for (const auto& [id, n] : lib.counts) {
    auto ov = c.variant_costs.find(id);
    library_cost += static_cast<double>(n) * (ov != c.variant_costs.end() ? ov->second : truth.cost(id));
  }
  bool premise = library_cost < static_cast<double>(elements) * per_element;
  bool ok = go == tol::kOriginalGotos && gu == tol::kUnrolledGotos && go == 8 * gu && premise &&
            o.energy_j > u.energy_j && u.energy_j > lib.energy_j;
  return {ok, fmt("BlockGoto_for %lld vs %lld; energy original %.6g J > unrolled %.6g J (%.1f%%) > library %.6g J "
                  "(%.1f%%); library %.3g J vs per-element sum %.3g J",
                  static_cast<long long>(go), static_cast<long long>(gu), o.energy_j, u.energy_j, u.change_pct,
                  lib.energy_j, lib.change_pct, library_cost, static_cast<double>(elements) * per_element)};
}

}  // namespace

int main() {
  std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact recovery", exact_recovery},
      {"noisy cross-validation", noisy_cross_validation},
      {"counting oracle", counting_oracle},
      {"integration", integration},
      {"gradient check", gradient_check},
      {"protocol statistics", protocol_statistics},
      {"conservation", conservation},
      {"refactoring comparison", refactoring},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o = {false, std::string("error: ") + ex.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
