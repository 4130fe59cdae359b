#include "emod/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "emod/accounting.hpp"
#include "emod/device.hpp"
#include "emod/frontend.hpp"
#include "emod/regress.hpp"
#include "json.hpp"

namespace emod {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kStageNames[] = {"parse", "blocks", "dict", "plan", "run", "measure", "fit", "validate", "report"};

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string case_file(const std::string& dir, int id, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%04d.%s", id, ext);
  return dir + "/" + buf;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Csv parse_csv(const std::string& text, const std::string& name) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (csv.header.empty()) {
      csv.header = std::move(cells);
    } else {
      if (cells.size() != csv.header.size())
        throw DimensionError(name + ": row has " + std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(csv.header.size()));
      csv.rows.push_back(std::move(cells));
    }
  }
  if (csv.header.empty()) throw DimensionError(name + " is empty");
  return csv;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw DimensionError(where + ": not a number: '" + s + "'");
}

/// Runs f(0..n-1) on up to `jobs` threads; rethrows the failure with the lowest index.
template <class F>
void parallel_for(int n, int jobs, F&& f) {
  int threads = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_at = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> to_doubles(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

const char* to_string(Stage s) { return kStageNames[static_cast<int>(s)]; }

std::optional<Stage> stage_from_string(std::string_view name) {
  for (Stage s : kAllStages)
    if (name == to_string(s)) return s;
  return std::nullopt;
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)), hash_(config_hash(config_)) {}

std::string Pipeline::artifact(const std::string& name) const { return config_.output_dir + "/" + name; }

std::string Pipeline::csv_header() const {
  return "# emod seed=" + std::to_string(config_.seed) + " config=" + hash_ + "\n";
}

void Pipeline::progress(const std::string& line) const {
  if (on_progress) on_progress(line);
}

std::string Pipeline::read_artifact(Stage stage, const std::string& name) const {
  std::string path = artifact(name);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError(stage, "missing input " + path + " (run the earlier stages first)", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Pipeline::write_artifact(const std::string& name, const std::string& text) const {
  fs::path path = artifact(name);
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

const Pipeline::Frontend& Pipeline::frontend() {
  if (!frontend_) {
    const std::string& path = config_.program_path;
    if (path.empty()) throw StageError(current_, "no program path configured");
    if (!fs::exists(path)) throw StageError(current_, "program not found: " + path, path);
    Frontend f;
    f.program = parse_file(path);
    f.table = divide_blocks(f.program);
    f.dict = build_dictionary(f.program, f.table);
    frontend_ = std::move(f);
  }
  return *frontend_;
}

void Pipeline::run_all() {
  for (Stage s : kAllStages) run(s);
}

void Pipeline::run(Stage stage) {
  current_ = stage;
  progress(std::string("stage ") + to_string(stage));
  try {
    fs::create_directories(config_.output_dir);
    switch (stage) {
      case Stage::Parse: stage_parse(); break;
      case Stage::Blocks: stage_blocks(); break;
      case Stage::Dict: stage_dict(); break;
      case Stage::Plan: stage_plan(); break;
      case Stage::Run: stage_run(); break;
      case Stage::Measure: stage_measure(); break;
      case Stage::Fit: stage_fit(); break;
      case Stage::Validate: stage_validate(); break;
      case Stage::Report: stage_report(); break;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& ex) {
    throw StageError(stage, ex.what());
  }
}

void Pipeline::stage_parse() {
  const auto& f = frontend();
  ojson root = ojson::parse(dump_ast_json(f.program));
  root["meta"] = {{"seed", config_.seed}, {"config_hash", hash_}};
  write_artifact("ast.json", root.dump(2));
}

void Pipeline::stage_blocks() {
  const auto& f = frontend();
  ojson root = ojson::parse(blocks_to_json(f.program, f.table));
  root["meta"] = {{"seed", config_.seed}, {"config_hash", hash_}};
  write_artifact("blocks.json", root.dump(2));
  progress(std::to_string(f.table.size()) + " blocks, " + std::to_string(f.table.removable_ids().size()) +
           " removable");
}

void Pipeline::stage_dict() {
  const auto& f = frontend();
  write_artifact("dict.csv", csv_header() + dictionary_to_csv(f.dict));
  progress(std::to_string(f.dict.num_ops()) + " operations");
}

std::vector<RunResult> Pipeline::path_runs(const std::vector<ExecutionCase>& cases) {
  std::size_t reuse = 0;
  if (cached_cases_.size() <= cases.size() &&
      std::equal(cached_cases_.begin(), cached_cases_.end(), cases.begin()))
    reuse = cached_cases_.size();
  if (reuse == cases.size()) {
    cached_runs_.resize(reuse);
    return cached_runs_;
  }
  const auto& f = frontend();
  RunOptions ro;
  ro.log_removed = config_.log_removed;
  ro.full_log = config_.full_log;
  ro.fps = config_.scenario.fps;
  ro.seed = config_.seed;
  std::vector<std::string> ops = f.dict.op_ids();
  std::vector<RunResult> out(cases.size());
  std::move(cached_runs_.begin(), cached_runs_.begin() + static_cast<std::ptrdiff_t>(reuse), out.begin());
  parallel_for(static_cast<int>(cases.size() - reuse), config_.jobs,
               [&](int i) { out[reuse + i] = emod::run(f.program, f.table, ops, cases[reuse + i], ro); });
  cached_cases_ = cases;
  cached_runs_ = out;
  return out;
}

void Pipeline::stage_plan() {
  const auto& f = frontend();
  std::vector<ExecutionCase> cases;
  if (!config_.plan_path.empty()) {
    if (!fs::exists(config_.plan_path))
      throw StageError(Stage::Plan, "plan not found: " + config_.plan_path, config_.plan_path);
    std::ifstream in(config_.plan_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    cases = plan_from_json(ss.str());
  } else {
    cases = plan_cases(f.table, config_.scenario, config_.cases, config_.seed);
    int gc = f.dict.index_of(op::kGC);
    int target_ops = f.dict.num_ops() - (gc >= 0 ? 1 : 0);
    int target = static_cast<int>(std::ceil(config_.min_rank_fraction * target_ops - 1e-9));
    for (int round = 0;; ++round) {
      std::vector<RunResult> runs = path_runs(cases);
      Eigen::MatrixXd n(static_cast<Eigen::Index>(cases.size()), target_ops);
      for (std::size_t r = 0; r < cases.size(); ++r) {
        auto counts = case_op_counts(f.dict.masked(cases[r].removed), runs[r].log);
        for (int j = 0, c = 0; j < f.dict.num_ops(); ++j)
          if (j != gc) n(static_cast<Eigen::Index>(r), c++) = static_cast<double>(counts[j]);
      }
      int rank = column_rank(n);
      progress("plan: " + std::to_string(cases.size()) + " cases, rank " + std::to_string(rank) + " of " +
               std::to_string(target_ops));
      if (rank >= target || round >= config_.max_augment_rounds) break;
      auto extra = augment_cases(f.table, config_.scenario, static_cast<int>(cases.size()), config_.augment_batch,
                                 Rng::derive(config_.seed, 0x617567, static_cast<std::uint64_t>(round)).next());
      cases.insert(cases.end(), extra.begin(), extra.end());
    }
  }
  write_artifact("plan.json", plan_to_json(cases, {config_.seed, hash_}));
}

std::vector<ExecutionCase> Pipeline::load_plan() { return plan_from_json(read_artifact(current_, "plan.json")); }

void Pipeline::stage_run() {
  const auto& f = frontend();
  std::vector<ExecutionCase> cases = load_plan();
  std::vector<RunResult> runs = path_runs(cases);
  std::ostringstream counts;
  counts << csv_header() << "case_id";
  for (const auto& op : f.dict.ops) counts << ',' << op.id;
  counts << '\n';
  for (std::size_t i = 0; i < cases.size(); ++i) {
    write_artifact(case_file("runs", cases[i].id, "csv"), csv_header() + block_log_to_csv(runs[i].log));
    if (config_.full_log) {
      std::string seq;
      for (int b : runs[i].entries) seq += std::to_string(b) + '\n';
      write_artifact(case_file("runs", cases[i].id, "log"), seq);
    }
    auto n = case_op_counts(f.dict.masked(cases[i].removed), runs[i].log);
    counts << cases[i].id;
    for (auto x : n) counts << ',' << x;
    counts << '\n';
  }
  write_artifact("counts.csv", counts.str());
  progress("run: " + std::to_string(cases.size()) + " path runs");
}

namespace {

struct CountsTable {
  std::vector<std::string> op_ids;
  std::vector<int> case_ids;
  std::vector<std::vector<double>> rows;
};

CountsTable parse_counts(const std::string& text) {
  Csv csv = parse_csv(text, "counts.csv");
  if (csv.header.front() != "case_id") throw DimensionError("counts.csv: first column must be case_id");
  CountsTable t;
  t.op_ids.assign(csv.header.begin() + 1, csv.header.end());
  for (const auto& row : csv.rows) {
    t.case_ids.push_back(static_cast<int>(to_double(row[0], "counts.csv")));
    std::vector<double> v;
    for (std::size_t j = 1; j < row.size(); ++j) v.push_back(to_double(row[j], "counts.csv"));
    t.rows.push_back(std::move(v));
  }
  return t;
}

}  // namespace

void Pipeline::stage_measure() {
  const auto& f = frontend();
  std::vector<ExecutionCase> cases = load_plan();
  CountsTable counts = parse_counts(read_artifact(Stage::Measure, "counts.csv"));
  if (counts.op_ids != f.dict.op_ids()) throw DimensionError("counts.csv columns differ from the dictionary");
  if (counts.case_ids.size() != cases.size()) throw DimensionError("counts.csv and plan.json list different cases");

  GroundTruth truth = make_ground_truth(f.dict.op_ids(), config_.seed, config_.truth);
  ojson truth_json = ojson::parse(truth_to_json(truth, config_.seed));
  truth_json["meta"] = {{"seed", config_.seed}, {"config_hash", hash_}};
  write_artifact("truth.json", truth_json.dump(2));

  SensorOptions sensor{config_.rate_hz, config_.sensor};
  std::vector<EnergyMeasurement> ms(cases.size());
  parallel_for(static_cast<int>(cases.size()), config_.jobs, [&](int i) {
    if (counts.case_ids[i] != cases[i].id) throw DimensionError("counts.csv rows are not in plan order");
    std::vector<std::int64_t> n(counts.rows[i].begin(), counts.rows[i].end());
    ms[i] = measure_counts(cases[i].id, n, cases[i].duration_s, config_.repeats, truth, config_.seed, sensor);
  });

  std::ostringstream meas, gc;
  meas << csv_header() << "case_id,e_joules,e_idle,e_meas,repeats,stderr\n";
  gc << csv_header() << "case_id,gc_mean\n";
  for (const auto& m : ms) {
    meas << m.case_id << ',' << number(m.e_joules) << ',' << number(m.e_idle) << ',' << number(m.e_meas) << ','
         << m.repeats << ',' << number(m.stderr_j) << '\n';
    gc << m.case_id << ',' << number(m.gc_mean) << '\n';
  }
  write_artifact("measurements.csv", meas.str());
  write_artifact("gc.csv", gc.str());

  if (!cases.empty()) {
    std::vector<std::int64_t> n(counts.rows[0].begin(), counts.rows[0].end());
    double d = simulated_workload_time(n, truth.time_s, cases[0].duration_s);
    PowerFunction pf(n, d, truth);
    Rng rng = Rng::derive(config_.seed, static_cast<std::uint64_t>(cases[0].id), 3);
    PowerTrace trace = sample_power(pf, sensor, truth.noise_sigma, truth.jitter_sigma_s, rng);
    write_artifact(case_file("traces", cases[0].id, "csv"), csv_header() + trace_to_csv(trace));
  }
  progress("measure: " + std::to_string(ms.size()) + " cases x " + std::to_string(config_.repeats) + " repeats");
}

namespace {

Assembled load_design(const std::string& counts_text, const std::string& gc_text, const std::string& meas_text) {
  CountsTable counts = parse_counts(counts_text);
  Csv gc = parse_csv(gc_text, "gc.csv");
  Csv meas = parse_csv(meas_text, "measurements.csv");
  auto gc_col = std::find(counts.op_ids.begin(), counts.op_ids.end(), op::kGC);
  std::map<int, double> gc_mean;
  for (const auto& row : gc.rows) gc_mean[static_cast<int>(to_double(row[0], "gc.csv"))] = to_double(row[1], "gc.csv");

  std::vector<CaseCounts> cc;
  for (std::size_t r = 0; r < counts.rows.size(); ++r) {
    CaseCounts c{counts.case_ids[r], counts.rows[r]};
    if (gc_col != counts.op_ids.end()) {
      auto it = gc_mean.find(c.case_id);
      if (it == gc_mean.end()) throw DimensionError("gc.csv has no row for case " + std::to_string(c.case_id));
      c.counts[static_cast<std::size_t>(gc_col - counts.op_ids.begin())] = it->second;
    }
    cc.push_back(std::move(c));
  }
  std::vector<CaseEnergy> ce;
  for (const auto& row : meas.rows)
    ce.push_back({static_cast<int>(to_double(row[0], "measurements.csv")), to_double(row[1], "measurements.csv")});
  return assemble(counts.op_ids, cc, ce);
}

}  // namespace

void Pipeline::stage_fit() {
  Assembled a = load_design(read_artifact(Stage::Fit, "counts.csv"), read_artifact(Stage::Fit, "gc.csv"),
                            read_artifact(Stage::Fit, "measurements.csv"));
  CostModel model = fit(a.matrix, a.e, config_.fit);
  write_artifact("model.json", model_to_json(model, hash_));
  char buf[96];
  std::snprintf(buf, sizeof buf, "fit: %ld iterations, J = %.6g", model.iterations, model.final_j);
  progress(buf);
}

void Pipeline::stage_validate() {
  Assembled a = load_design(read_artifact(Stage::Validate, "counts.csv"), read_artifact(Stage::Validate, "gc.csv"),
                            read_artifact(Stage::Validate, "measurements.csv"));
  FitReport rep = cross_validate(a.matrix.n, a.e, config_.fit, config_.rounds);
  write_artifact("metrics.csv", csv_header() + metrics_to_csv(rep));
  for (const auto& r : rep.rounds) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "validate: round %d val_r=%.4f val_nmae=%.4f", r.round, r.val_r, r.val_nmae);
    progress(buf);
  }
}

void Pipeline::stage_report() {
  const auto& f = frontend();
  CostModel model = model_from_json(read_artifact(Stage::Report, "model.json"));
  std::vector<ExecutionCase> cases = load_plan();
  auto base = std::find_if(cases.begin(), cases.end(), [](const ExecutionCase& c) { return c.removed.empty(); });
  if (base == cases.end()) throw PlanError("plan has no case without removals");
  BlockLog log = block_log_from_csv(read_artifact(Stage::Report, case_file("runs", base->id, "csv")),
                                    base->id);
  if (static_cast<int>(log.counts.size()) != f.table.size())
    throw DimensionError("block log of case " + std::to_string(base->id) + " does not match the block table");

  std::vector<double> counts = to_doubles(case_op_counts(f.dict, log));
  int k = std::min(config_.top_k, static_cast<int>(model.cost_j.size()));
  OpRanking ranking = rank_operations(model, counts, k);
  BlockBreakdown blocks = block_breakdown(model, f.program, f.table, f.dict, log);
  Conservation cons = check_conservation(model, f.dict, log);

  std::vector<Program> programs;
  programs.reserve(config_.variants.size());
  for (const auto& path : config_.variants) {
    if (!fs::exists(path)) throw StageError(Stage::Report, "variant not found: " + path, path);
    programs.push_back(parse_file(path));
  }
  std::vector<VariantInput> inputs;
  for (std::size_t i = 0; i < programs.size(); ++i)
    inputs.push_back({fs::path(config_.variants[i]).stem().string(), &programs[i]});
  std::vector<VariantRow> variants;
  if (!inputs.empty()) variants = compare_variants(model, inputs, *base, config_.variant_costs);

  double control_share = 0.0;
  for (const auto& r : ranking.rows)
    if (r.id.rfind("BlockGoto_", 0) == 0 || r.id == op::kMethodInvocation) control_share += r.share;

  ojson root;
  root["meta"] = {{"seed", config_.seed}, {"config_hash", hash_}, {"case_id", base->id}};
  root["totals"] = {{"workload_j", ranking.total_j},
                    {"top_k", ranking.k},
                    {"top_k_share", ranking.top_k_share},
                    {"goto_and_invocation_share", control_share}};
  root["conservation"] = {{"op_view_j", cons.op_view_j},
                          {"block_view_j", cons.block_view_j},
                          {"dot_j", cons.dot_j},
                          {"bit_identical", cons.bit_identical()}};
  ojson ops = ojson::array();
  for (const auto& r : ranking.rows)
    ops.push_back({{"rank", r.rank},
                   {"id", r.id},
                   {"class", class_label(r.cls)},
                   {"unit_cost_j", r.unit_cost_j},
                   {"executions", r.executions},
                   {"total_j", r.total_j},
                   {"share", r.share}});
  root["ops"] = std::move(ops);
  ojson brows = ojson::array();
  for (const auto& b : blocks.rows) {
    ojson shares;
    for (OpClass c : kAllOpClasses) shares[class_label(c)] = b.class_share[static_cast<std::size_t>(c)];
    brows.push_back({{"id", b.id},
                     {"method", b.method},
                     {"kind", to_string(b.kind)},
                     {"executions", b.executions},
                     {"in_app_j", b.in_app_j},
                     {"single_j", b.single_j},
                     {"per3000_j", b.per3000_j},
                     {"class_share_pct", std::move(shares)}});
  }
  root["blocks"] = std::move(brows);
  ojson vrows = ojson::array();
  for (const auto& v : variants) vrows.push_back({{"name", v.name}, {"energy_j", v.energy_j}, {"change_pct", v.change_pct}});
  root["variants"] = std::move(vrows);
  write_artifact("report.json", root.dump(2));
  write_artifact("ops.csv", csv_header() + ranking_to_csv(ranking));
  write_artifact("blocks.csv", csv_header() + blocks_breakdown_to_csv(blocks));
  if (!variants.empty()) write_artifact("variants.csv", csv_header() + variants_to_csv(variants));

  if (config_.svg) {
    std::vector<BarSeries> bars;
    for (int i = 0; i < ranking.k; ++i) bars.push_back({ranking.rows[i].id, ranking.rows[i].unit_cost_j * 1e6});
    write_artifact("ops.svg", svg_bar_chart("Most expensive operations", bars, "µJ"));

    std::vector<const BlockRow*> top;
    for (const auto& b : blocks.rows) top.push_back(&b);
    std::stable_sort(top.begin(), top.end(), [](const BlockRow* a, const BlockRow* b) { return a->in_app_j > b->in_app_j; });
    top.resize(std::min<std::size_t>(top.size(), static_cast<std::size_t>(config_.top_k)));
    std::vector<std::string> labels;
    std::vector<std::array<double, kNumOpClasses>> shares;
    for (const BlockRow* b : top) {
      labels.push_back(b->method + " #" + std::to_string(b->id));
      shares.push_back(b->class_share);
    }
    write_artifact("blocks.svg", svg_class_chart("Energy by operation class", labels, shares));
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "report: workload %.6g J, top-%d share %.1f%%", ranking.total_j, ranking.k,
                100.0 * ranking.top_k_share);
  progress(buf);
}

}  // namespace emod
