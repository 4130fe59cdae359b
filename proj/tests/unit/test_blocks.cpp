#include <set>

#include "doctest.h"
#include "emod/blocks.hpp"
#include "emod/frontend.hpp"
#include "fuzz.hpp"
#include "json.hpp"
#include "util.hpp"

using namespace emod;

namespace {

const char* kLoops = R"(void main() {
  int a = 0;
  for (int i = 0; i < 3; i++) {
    a = a + i;
  }
  a = a * 2;
  while (a > 0) {
    a = a - 5;
  }
  a = 1;
}
)";

bool has_edge(const BlockTable& t, int from, int to) {
  const auto& s = t.blocks.at(from).succ;
  return std::find(s.begin(), s.end(), to) != s.end();
}

void check_well_formed(const Program& p, const BlockTable& t) {
  for (int i = 0; i < t.size(); ++i) CHECK(t.blocks[i].id == i);
  std::set<int> seen;
  for (const auto& b : t.blocks)
    for (int s : b.stmts) {
      CHECK(seen.insert(s).second);
      CHECK(t.stmt_block.at(s) == b.id);
    }
  for (const auto& b : t.blocks) {
    for (int s : b.succ) {
      REQUIRE(s >= 0);
      REQUIRE(s < t.size());
      CHECK(t.blocks[s].method == b.method);
    }
    if (b.kind == BlockKind::ForHeader || b.kind == BlockKind::WhileHeader) {
      CHECK(b.succ.size() >= 1);
      CHECK(b.succ.size() <= 2);
    }
    if (b.kind == BlockKind::ForInit || b.kind == BlockKind::ForUpdate || b.kind == BlockKind::LoopBody)
      CHECK(b.succ.size() >= 1);
    if (b.kind == BlockKind::Entry || b.kind == BlockKind::ForInit || b.kind == BlockKind::ForHeader ||
        b.kind == BlockKind::ForUpdate || b.kind == BlockKind::WhileHeader)
      CHECK_FALSE(b.removable);
  }
  CHECK(static_cast<int>(t.method_entry.size()) == static_cast<int>(p.methods.size()));
}

}  // namespace

TEST_SUITE("blocks") {
  TEST_CASE("for loop divides into init, condition, update and body") {
    Program p = parse(kLoops);
    BlockTable t = divide_blocks(p);
    REQUIRE(t.size() == 9);
    CHECK(t.blocks[0].kind == BlockKind::Entry);
    CHECK(t.blocks[1].kind == BlockKind::ForInit);
    CHECK(t.blocks[2].kind == BlockKind::ForHeader);
    CHECK(t.blocks[3].kind == BlockKind::LoopBody);
    CHECK(t.blocks[4].kind == BlockKind::ForUpdate);
    CHECK(t.blocks[5].kind == BlockKind::Plain);
    CHECK(has_edge(t, 0, 1));
    CHECK(has_edge(t, 1, 2));
    CHECK(has_edge(t, 2, 3));
    CHECK(has_edge(t, 3, 4));
    CHECK(has_edge(t, 4, 2));
    CHECK(has_edge(t, 2, 5));
    CHECK(t.blocks[2].succ.size() == 2);
  }

  TEST_CASE("while loop divides into header and body") {
    Program p = parse(kLoops);
    BlockTable t = divide_blocks(p);
    CHECK(t.blocks[6].kind == BlockKind::WhileHeader);
    CHECK(t.blocks[7].kind == BlockKind::LoopBody);
    CHECK(has_edge(t, 5, 6));
    CHECK(has_edge(t, 6, 7));
    CHECK(has_edge(t, 7, 6));
    CHECK(has_edge(t, 6, 8));
    CHECK(t.blocks[7].goto_kind == GotoKind::While);
    CHECK(t.blocks[3].goto_kind == GotoKind::For);
  }

  TEST_CASE("straight-line method is one block") {
    Program p = parse("void main() { int a = 1; a = a + 1; a = a * 3; float f = 2.0; f = f / 2; }");
    BlockTable t = divide_blocks(p);
    REQUIRE(t.size() == 1);
    CHECK(t.blocks[0].stmts.size() == 5);
    auto points = instrumentation_points(t);
    REQUIRE(points.size() == 1);
    CHECK(points[0].span.line == 1);
  }

  TEST_CASE("if bodies are separate blocks with an if goto") {
    Program p = parse("void main() { int a = 1; if (a > 0) { a = 2; } else { a = 3; } a = 4; }");
    BlockTable t = divide_blocks(p);
    int bodies = 0;
    for (const auto& b : t.blocks)
      if (b.kind == BlockKind::IfBody) {
        ++bodies;
        CHECK(b.goto_kind == GotoKind::If);
        CHECK(b.removable);
      }
    CHECK(bodies == 2);
  }

  TEST_CASE("blocks holding a return are not removable") {
    Program p = parse("int f(int x) { if (x > 0) { return 1; } x = x + 1; return x; }\nvoid main() { int y = f(2); }");
    BlockTable t = divide_blocks(p);
    for (const auto& b : t.blocks)
      if (b.kind == BlockKind::IfBody) CHECK_FALSE(b.removable);
  }

  TEST_CASE("for loop gets four instrumentation points") {
    Program p = parse("void main() { for (int i = 0; i < 3; i++) { int z = i; } }");
    BlockTable t = divide_blocks(p);
    auto points = instrumentation_points(t);
    int loop_points = 0;
    for (const auto& pt : points) {
      BlockKind k = t.blocks[pt.block].kind;
      if (k == BlockKind::ForInit || k == BlockKind::ForHeader || k == BlockKind::ForUpdate || k == BlockKind::LoopBody)
        ++loop_points;
    }
    CHECK(loop_points == 4);
  }

  TEST_CASE("one instrumentation point per block") {
    Program p = testing::load_fixture("game_loop.mj");
    BlockTable t = divide_blocks(p);
    auto points = instrumentation_points(t);
    REQUIRE(static_cast<int>(points.size()) == t.size());
    for (int i = 0; i < t.size(); ++i) {
      CHECK(points[i].block == i);
      CHECK(points[i].span.line == t.blocks[i].start.line);
    }
  }

  TEST_CASE("switch cases are headers and if bodies") {
    Program p = parse("void main() { int k = 2; switch (k) { case 0: k = 1; case 1: k = 2; case 2: k = 3; default: k = 4; } }");
    BlockTable t = divide_blocks(p);
    int headers = 0, bodies = 0;
    for (const auto& b : t.blocks) {
      if (b.kind == BlockKind::SwitchHeader) {
        ++headers;
        CHECK(b.goto_kind == GotoKind::If);
      }
      if (b.kind == BlockKind::IfBody) ++bodies;
    }
    CHECK(headers == 2);
    CHECK(bodies == 4);
  }

  TEST_CASE("fixtures and random programs are well formed") {
    for (const char* name : {"game_loop.mj", "blit_original.mj", "blit_unrolled.mj"}) {
      Program p = testing::load_fixture(name);
      check_well_formed(p, divide_blocks(p));
    }
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      Program p = parse(testing::random_program(seed));
      check_well_formed(p, divide_blocks(p));
    }
  }

  TEST_CASE("division is deterministic") {
    Program p = testing::load_fixture("game_loop.mj");
    CHECK(blocks_to_json(p, divide_blocks(p)) == blocks_to_json(p, divide_blocks(p)));
  }

  TEST_CASE("block table JSON has the documented fields") {
    Program p = parse(kLoops);
    auto j = nlohmann::json::parse(blocks_to_json(p, divide_blocks(p)));
    REQUIRE(j["blocks"].size() == 9);
    const auto& b = j["blocks"][2];
    CHECK(b["id"] == 2);
    CHECK(b["method"] == "Main.main");
    CHECK(b["kind"] == "for-header");
    CHECK(b["first_line"] == 3);
    CHECK(b["last_line"] == 3);
    CHECK(b["succ"] == nlohmann::json::array({3, 5}));
    CHECK(b["removable"] == false);
  }
}
