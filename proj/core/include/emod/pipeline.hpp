#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emod/ast.hpp"
#include "emod/blocks.hpp"
#include "emod/config.hpp"
#include "emod/error.hpp"
#include "emod/opdict.hpp"
#include "emod/planner.hpp"
#include "emod/runner.hpp"

namespace emod {

enum class Stage : std::uint8_t { Parse, Blocks, Dict, Plan, Run, Measure, Fit, Validate, Report };

inline constexpr std::array<Stage, 9> kAllStages = {Stage::Parse, Stage::Blocks,  Stage::Dict,
                                                    Stage::Plan,  Stage::Run,     Stage::Measure,
                                                    Stage::Fit,   Stage::Validate, Stage::Report};

const char* to_string(Stage s);
std::optional<Stage> stage_from_string(std::string_view name);

/// A stage failed. `missing_path` is set when the cause is an input file that does not exist.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& cause, std::string missing_path = {})
      : Error(std::string("stage ") + to_string(stage) + ": " + cause),
        stage_(stage),
        cause_(cause),
        missing_path_(std::move(missing_path)) {}

  Stage stage() const noexcept { return stage_; }
  const std::string& cause() const noexcept { return cause_; }
  const std::string& missing_path() const noexcept { return missing_path_; }

 private:
  Stage stage_;
  std::string cause_;
  std::string missing_path_;
};

/// File-based experiment. Each stage reads what earlier stages wrote under `output_dir`, so any
/// stage can be rerun on its own.
///
/// Artifacts: ast.json, blocks.json, dict.csv, plan.json, runs/case_NNNN.csv, counts.csv,
/// truth.json, measurements.csv, gc.csv, traces/case_NNNN.csv, model.json, metrics.csv,
/// report.json, ops.csv, blocks.csv, variants.csv and, with `svg`, ops.svg and blocks.svg.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  void run_all();
  void run(Stage stage);

  const RunConfig& config() const { return config_; }
  const std::string& hash() const { return hash_; }
  std::string artifact(const std::string& name) const;

  /// Receives one line per notable step.
  std::function<void(const std::string&)> on_progress;

 private:
  struct Frontend {
    Program program;
    BlockTable table;
    OpDictionary dict;
  };

  const Frontend& frontend();
  std::vector<RunResult> path_runs(const std::vector<ExecutionCase>& cases);
  std::vector<ExecutionCase> load_plan();
  std::string read_artifact(Stage stage, const std::string& name) const;
  void write_artifact(const std::string& name, const std::string& text) const;
  std::string csv_header() const;
  void progress(const std::string& line) const;

  void stage_parse();
  void stage_blocks();
  void stage_dict();
  void stage_plan();
  void stage_run();
  void stage_measure();
  void stage_fit();
  void stage_validate();
  void stage_report();

  RunConfig config_;
  std::string hash_;
  std::optional<Frontend> frontend_;
  Stage current_ = Stage::Parse;
  // Path runs computed while planning, reused by the run stage for the same cases.
  std::vector<ExecutionCase> cached_cases_;
  std::vector<RunResult> cached_runs_;
};

}  // namespace emod
