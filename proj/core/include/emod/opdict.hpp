#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emod/ast.hpp"
#include "emod/blocks.hpp"
#include "emod/ops.hpp"

namespace emod {

/// Static occurrence counts O[i][j] of operation j in block i. Columns are sorted by op id.
struct OpDictionary {
  std::vector<EnergyOp> ops;
  int num_blocks = 0;
  std::vector<std::int64_t> counts;  // row-major, num_blocks × ops.size()

  int num_ops() const { return static_cast<int>(ops.size()); }
  std::int64_t at(int block, int op) const { return counts[static_cast<std::size_t>(block) * ops.size() + op]; }
  std::int64_t& at(int block, int op) { return counts[static_cast<std::size_t>(block) * ops.size() + op]; }

  /// Column index of an op id, or -1.
  int index_of(const std::string& id) const;
  std::vector<std::string> op_ids() const;

  /// Dictionary seen by a case that removes `removed`: those rows keep only their goto.
  OpDictionary masked(const std::vector<int>& removed) const;
};

/// Per-case block execution counts B_i.
struct BlockLog {
  int case_id = 0;
  std::vector<std::int64_t> counts;
};

struct DictionaryOptions {
  /// Adds a `Lib:GC` column with zero static occurrences; the device supplies its executions.
  bool include_gc = true;
};

OpDictionary build_dictionary(const Program& program, const BlockTable& table,
                              const DictionaryOptions& options = {});

/// n_j = Σ_i B_i · O[i][j]. Throws DimensionError when the log length differs from the block count.
std::vector<std::int64_t> case_op_counts(const OpDictionary& dict, const BlockLog& log);

/// CSV with header `block,<op ids>` and one row per block.
std::string dictionary_to_csv(const OpDictionary& dict);

}  // namespace emod
