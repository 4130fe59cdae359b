#include "emod/blocks.hpp"

#include <algorithm>

#include "json.hpp"

namespace emod {

const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::Entry: return "entry";
    case BlockKind::Plain: return "plain";
    case BlockKind::IfBody: return "if-body";
    case BlockKind::ForInit: return "for-init";
    case BlockKind::ForHeader: return "for-header";
    case BlockKind::ForUpdate: return "for-update";
    case BlockKind::WhileHeader: return "while-header";
    case BlockKind::LoopBody: return "loop-body";
    case BlockKind::SwitchHeader: return "switch-header";
  }
  return "?";
}

std::vector<int> BlockTable::removable_ids() const {
  std::vector<int> out;
  for (const auto& b : blocks)
    if (b.removable) out.push_back(b.id);
  return out;
}

namespace {

class Divider {
 public:
  explicit Divider(const Program& p) : p_(p) {
    t_.list_entry.assign(p.num_lists, -1);
    t_.stmt_block.assign(p.num_stmts, -1);
    t_.stmt_starts.assign(p.num_stmts, -1);
    t_.for_init.assign(p.num_stmts, -1);
    t_.for_header.assign(p.num_stmts, -1);
    t_.for_update.assign(p.num_stmts, -1);
    t_.while_header.assign(p.num_stmts, -1);
    t_.switch_headers.assign(p.num_stmts, {});
  }

  BlockTable run() {
    for (const auto& m : p_.methods) {
      method_ = m.index;
      int entry = open(BlockKind::Entry, GotoKind::None, m.body->span);
      t_.method_entry.push_back(entry);
      list(*m.body, entry);
    }
    finish();
    return std::move(t_);
  }

 private:
  int open(BlockKind kind, GotoKind g, Span start) {
    Block b;
    b.id = t_.size();
    b.method = method_;
    b.kind = kind;
    b.goto_kind = g;
    b.start = start;
    b.first_line = b.last_line = start.line;
    t_.blocks.push_back(std::move(b));
    return t_.blocks.back().id;
  }

  void edge(int from, int to) {
    auto& s = t_.blocks[from].succ;
    if (std::find(s.begin(), s.end(), to) == s.end()) s.push_back(to);
  }

  void connect(const std::vector<int>& from, int to) {
    for (int f : from) edge(f, to);
  }

  void place(const Stmt& s, int block) {
    t_.stmt_block[s.id] = block;
    t_.blocks[block].stmts.push_back(s.id);
  }

  // Divides a statement list whose entry block already exists. Returns the blocks that
  // fall through to whatever follows the list.
  std::vector<int> list(const StmtList& l, int entry) {
    t_.list_entry[l.id] = entry;
    int cur = entry;
    std::vector<int> open_ends{entry};
    bool after_control = false;
    for (const auto& sp : l.stmts) {
      const Stmt& s = *sp;
      bool loop = s.kind == StmtKind::For || s.kind == StmtKind::While;
      if (after_control && !loop) {
        cur = open(BlockKind::Plain, GotoKind::None, s.span);
        t_.stmt_starts[s.id] = cur;
        connect(open_ends, cur);
        open_ends = {cur};
      }
      after_control = false;
      switch (s.kind) {
        case StmtKind::VarDecl:
        case StmtKind::Assign:
        case StmtKind::ExprStmt:
          place(s, cur);
          break;
        case StmtKind::Return:
          place(s, cur);
          open_ends.clear();
          break;
        case StmtKind::If: {
          place(s, cur);
          std::vector<int> ends;
          int then_b = open(BlockKind::IfBody, GotoKind::If, s.body->span);
          edge(cur, then_b);
          append(ends, list(*s.body, then_b));
          if (s.else_body) {
            int else_b = open(BlockKind::IfBody, GotoKind::If, s.else_body->span);
            edge(cur, else_b);
            append(ends, list(*s.else_body, else_b));
          } else {
            ends.push_back(cur);
          }
          open_ends = ends;
          after_control = true;
          break;
        }
        case StmtKind::For: {
          int init = open(BlockKind::ForInit, GotoKind::None, s.init ? s.init->span : s.span);
          connect(open_ends, init);
          if (s.init) place(*s.init, init);
          int header = open(BlockKind::ForHeader, GotoKind::None, s.expr->span);
          edge(init, header);
          place(s, header);
          int body = open(BlockKind::LoopBody, GotoKind::For, s.body->span);
          edge(header, body);
          auto body_ends = list(*s.body, body);
          int update = open(BlockKind::ForUpdate, GotoKind::None, s.update ? s.update->span : s.span);
          connect(body_ends, update);
          if (s.update) place(*s.update, update);
          edge(update, header);
          t_.for_init[s.id] = init;
          t_.for_header[s.id] = header;
          t_.for_update[s.id] = update;
          cur = header;
          open_ends = {header};
          after_control = true;
          break;
        }
        case StmtKind::While: {
          int header = open(BlockKind::WhileHeader, GotoKind::None, s.expr->span);
          connect(open_ends, header);
          place(s, header);
          int body = open(BlockKind::LoopBody, GotoKind::While, s.body->span);
          edge(header, body);
          connect(list(*s.body, body), header);
          t_.while_header[s.id] = header;
          cur = header;
          open_ends = {header};
          after_control = true;
          break;
        }
        case StmtKind::Switch: {
          place(s, cur);
          std::vector<int> ends;
          int test = cur;
          for (std::size_t k = 0; k < s.cases.size(); ++k) {
            const SwitchCase& c = s.cases[k];
            if (k > 0) {
              int h = open(BlockKind::SwitchHeader, GotoKind::If, c.label->span);
              edge(test, h);
              t_.switch_headers[s.id].push_back(h);
              test = h;
            }
            int body = open(BlockKind::IfBody, GotoKind::If, c.body.span);
            edge(test, body);
            append(ends, list(c.body, body));
          }
          if (s.else_body) {
            int body = open(BlockKind::IfBody, GotoKind::If, s.else_body->span);
            edge(test, body);
            append(ends, list(*s.else_body, body));
          } else {
            ends.push_back(test);
          }
          open_ends = ends;
          after_control = true;
          break;
        }
      }
    }
    return open_ends;
  }

  static void append(std::vector<int>& to, const std::vector<int>& from) {
    for (int x : from)
      if (std::find(to.begin(), to.end(), x) == to.end()) to.push_back(x);
  }

  void finish() {
    for (auto& b : t_.blocks) {
      bool has_return = false;
      if (!b.stmts.empty()) {
        const Stmt& first = *p_.stmt_by_id[b.stmts.front()];
        b.start = first.span;
        b.first_line = first.span.line;
        b.last_line = first.span.line;
        for (int sid : b.stmts) {
          const Stmt& s = *p_.stmt_by_id[sid];
          bool compound = s.kind == StmtKind::If || s.kind == StmtKind::For ||
                          s.kind == StmtKind::While || s.kind == StmtKind::Switch;
          int last = compound ? s.span.line : std::max(s.end_line, s.span.line);
          b.first_line = std::min(b.first_line, s.span.line);
          b.last_line = std::max(b.last_line, last);
          if (s.kind == StmtKind::Return) has_return = true;
        }
      }
      bool body_like = b.kind == BlockKind::Plain || b.kind == BlockKind::IfBody ||
                       b.kind == BlockKind::LoopBody;
      b.removable = body_like && !b.stmts.empty() && !has_return;
    }
  }

  const Program& p_;
  BlockTable t_;
  int method_ = -1;
};

}  // namespace

BlockTable divide_blocks(const Program& program) { return Divider(program).run(); }

std::vector<InstrumentationPoint> instrumentation_points(const BlockTable& table) {
  std::vector<InstrumentationPoint> out;
  out.reserve(table.blocks.size());
  for (const auto& b : table.blocks) out.push_back({b.id, b.start});
  return out;
}

std::string blocks_to_json(const Program& program, const BlockTable& table, int indent) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& b : table.blocks) {
    nlohmann::ordered_json j;
    j["id"] = b.id;
    j["method"] = program.methods[b.method].qualified_name();
    j["kind"] = to_string(b.kind);
    j["first_line"] = b.first_line;
    j["last_line"] = b.last_line;
    j["succ"] = b.succ;
    j["removable"] = b.removable;
    arr.push_back(std::move(j));
  }
  nlohmann::ordered_json root;
  root["blocks"] = std::move(arr);
  return root.dump(indent);
}

}  // namespace emod
