#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emod/ast.hpp"
#include "emod/blocks.hpp"
#include "emod/opdict.hpp"
#include "emod/planner.hpp"

namespace emod {

enum class RunMode : std::uint8_t {
  LogPath,      // block log only
  TallyOracle,  // block log plus a direct per-operation tally
};

struct RunOptions {
  RunMode mode = RunMode::LogPath;
  /// Removed blocks are logged and their goto counted. When false they leave no trace at all.
  bool log_removed = true;
  /// Keep the full sequence of entered block ids.
  bool full_log = false;
  /// Record (library op, frame) for every extern call.
  bool trace_library = false;
  std::int64_t step_limit = 100'000'000;
  int max_call_depth = 4096;
  double fps = 30.0;
  std::uint64_t seed = 0;  // Math.random stream
};

struct LibraryCall {
  int op = -1;  // column in the tally order
  int frame = 0;
};

struct RunResult {
  int case_id = 0;
  BlockLog log;
  std::vector<std::int64_t> tally;  // TallyOracle only, in `op_ids` order
  std::vector<int> entries;         // full_log only
  std::vector<LibraryCall> library_calls;
  std::int64_t steps = 0;
  int frames = 0;
  double duration_s = 0.0;  // target duration of the case
};

/// Executes the program's host entry points under a case.
///
/// Host protocol: `init()` once, then per frame k the input events due before the end of the
/// frame (`onTap(int,int)`, `onKey(int)`) followed by `update(k)`. A program with neither
/// `init` nor `update` but a `main()` has `main` called once.
///
/// `op_ids` fixes the tally column order; the tally is empty in LogPath mode.
/// Throws StepLimitExceeded, RuntimeFault, or PlanError for a removal outside the table.
RunResult run(const Program& program, const BlockTable& table, const std::vector<std::string>& op_ids,
              const ExecutionCase& c, const RunOptions& options = {});

/// Workload time Σ n_j·time_j padded with idle time up to the target duration.
/// Throws DimensionError when the lengths differ.
double simulated_workload_time(const std::vector<std::int64_t>& counts, const std::vector<double>& op_time_s,
                               double target_s);
double simulated_workload_time(const RunResult& result, const std::vector<double>& op_time_s);

/// Compact log: `block_id,count` rows for every block.
std::string block_log_to_csv(const BlockLog& log);
BlockLog block_log_from_csv(const std::string& text, int case_id = 0);

}  // namespace emod
