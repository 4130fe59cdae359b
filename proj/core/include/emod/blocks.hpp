#pragma once

#include <string>
#include <vector>

#include "emod/ast.hpp"
#include "emod/ops.hpp"

namespace emod {

enum class BlockKind : std::uint8_t {
  Entry,         // first block of a method body
  Plain,         // statements following a control statement
  IfBody,        // then/else branch or switch case body
  ForInit,
  ForHeader,     // for-loop condition
  ForUpdate,
  WhileHeader,
  LoopBody,
  SwitchHeader,  // test of a later switch case
};

const char* to_string(BlockKind k);

struct Block {
  int id = -1;
  int method = -1;
  BlockKind kind = BlockKind::Plain;
  GotoKind goto_kind = GotoKind::None;  // goto counted on each entry
  int first_line = 0;
  int last_line = 0;
  Span start;              // where the log instruction sits
  std::vector<int> stmts;  // statement ids in execution order
  std::vector<int> succ;
  bool removable = false;
};

/// Basic blocks of a program with node-id lookups used by the counter and the interpreter.
struct BlockTable {
  std::vector<Block> blocks;

  std::vector<int> list_entry;   // list id → block entered when the list starts, or -1
  std::vector<int> stmt_block;   // stmt id → block holding the statement
  std::vector<int> stmt_starts;  // stmt id → plain block that starts at the statement, or -1
  std::vector<int> method_entry;  // method index → entry block

  // Per loop statement id (-1 elsewhere).
  std::vector<int> for_init;
  std::vector<int> for_header;
  std::vector<int> for_update;
  std::vector<int> while_header;
  // Per switch statement id: header block of cases 1..k-1 (case 0 is tested in place).
  std::vector<std::vector<int>> switch_headers;

  int size() const { return static_cast<int>(blocks.size()); }
  std::vector<int> removable_ids() const;
};

BlockTable divide_blocks(const Program& program);

struct InstrumentationPoint {
  int block = -1;
  Span span;
};

/// One log point per block, at the block's first statement (or its construct when empty).
std::vector<InstrumentationPoint> instrumentation_points(const BlockTable& table);

/// `{blocks:[{id, method, kind, first_line, last_line, succ, removable}]}`
std::string blocks_to_json(const Program& program, const BlockTable& table, int indent = 2);

}  // namespace emod
