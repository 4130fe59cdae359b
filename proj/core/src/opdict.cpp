#include "emod/opdict.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "emod/error.hpp"

namespace emod {

namespace {

using Tally = std::map<std::string, std::int64_t>;

class Counter {
 public:
  explicit Counter(const Program& p) : p_(p) {}

  void lvalue(const Expr& e, Tally& t) {
    if (e.kind == ExprKind::Field) {
      ++t[op::kFieldReference];
    } else if (e.kind == ExprKind::Index) {
      ++t[op::kArrayReference];
      expr(*e.kids[0], t);
      expr(*e.kids[1], t);
    }
  }

  void expr(const Expr& e, Tally& t) {
    switch (e.kind) {
      case ExprKind::Field: ++t[op::kFieldReference]; break;
      case ExprKind::Index: ++t[op::kArrayReference]; break;
      case ExprKind::Length: ++t[op::kFieldReference]; break;
      case ExprKind::Unary:
        ++t[e.unary_op == UnaryOp::Neg ? op::negation(e.type) : std::string(op::kNot)];
        break;
      case ExprKind::Binary: ++t[op::binary(e.binary_op, e.lhs_type, e.rhs_type)]; break;
      case ExprKind::Cast: ++t[op::conversion(e.lhs_type, e.type)]; break;
      case ExprKind::Call: {
        ++t[op::kMethodInvocation];
        for (const auto& prm : p_.methods[e.target].params) ++t[op::parameter(prm.type)];
        break;
      }
      case ExprKind::LibCall: {
        const Extern& x = p_.externs[e.target];
        ++t[op::lib(x.qualified_name())];
        for (Type pt : x.params) ++t[op::parameter(pt)];
        break;
      }
      case ExprKind::NewArray: ++t[op::new_array(e.type.element())]; break;
      case ExprKind::IncDec:
        ++t[e.increment ? op::kIncrement : op::kDecrement];
        lvalue(*e.kids[0], t);
        return;
      default: break;
    }
    for (const auto& k : e.kids) expr(*k, t);
  }

  // Operations a statement contributes to the block that holds it.
  void stmt(const Stmt& s, Tally& t) {
    switch (s.kind) {
      case StmtKind::VarDecl:
        ++t[op::declaration(s.decl_type)];
        if (s.expr) {
          ++t[op::assign(s.decl_type, s.expr->type)];
          expr(*s.expr, t);
        }
        break;
      case StmtKind::Assign:
        lvalue(*s.target, t);
        expr(*s.expr, t);
        if (s.assign_op != AssignOp::Set)
          ++t[op::binary(op::compound_binary(s.assign_op), s.target->type, s.expr->type)];
        ++t[op::assign(s.target->type, s.op_result)];
        break;
      case StmtKind::ExprStmt: expr(*s.expr, t); break;
      case StmtKind::Return:
        if (s.expr) {
          ++t[op::ret(p_.methods[p_.stmt_method[s.id]].return_type)];
          expr(*s.expr, t);
        }
        break;
      case StmtKind::If:
      case StmtKind::For:
      case StmtKind::While: expr(*s.expr, t); break;
      case StmtKind::Switch:
        expr(*s.expr, t);
        if (!s.cases.empty()) ++t[op::binary(BinaryOp::Eq, s.expr->type, s.cases[0].label->type)];
        break;
    }
  }

 private:
  const Program& p_;
};

}  // namespace

int OpDictionary::index_of(const std::string& id) const {
  auto it = std::lower_bound(ops.begin(), ops.end(), id,
                             [](const EnergyOp& o, const std::string& v) { return o.id < v; });
  return it != ops.end() && it->id == id ? static_cast<int>(it - ops.begin()) : -1;
}

std::vector<std::string> OpDictionary::op_ids() const {
  std::vector<std::string> ids;
  ids.reserve(ops.size());
  for (const auto& o : ops) ids.push_back(o.id);
  return ids;
}

OpDictionary OpDictionary::masked(const std::vector<int>& removed) const {
  OpDictionary out = *this;
  for (int b : removed) {
    if (b < 0 || b >= num_blocks) throw DimensionError("removed block id out of range: " + std::to_string(b));
    for (int j = 0; j < num_ops(); ++j) {
      if (!ops[j].id.starts_with("BlockGoto_")) out.at(b, j) = 0;
    }
  }
  return out;
}

OpDictionary build_dictionary(const Program& program, const BlockTable& table,
                              const DictionaryOptions& options) {
  Counter counter(program);
  std::vector<Tally> rows(table.blocks.size());
  for (const auto& b : table.blocks) {
    Tally& t = rows[b.id];
    if (b.goto_kind != GotoKind::None) ++t[op::block_goto(b.goto_kind)];
    for (int sid : b.stmts) counter.stmt(*program.stmt_by_id[sid], t);
  }
  for (int sid = 0; sid < program.num_stmts; ++sid) {
    const Stmt& s = *program.stmt_by_id[sid];
    if (s.kind != StmtKind::Switch) continue;
    const auto& headers = table.switch_headers[sid];
    for (std::size_t k = 0; k < headers.size(); ++k)
      ++rows[headers[k]][op::binary(BinaryOp::Eq, s.expr->type, s.cases[k + 1].label->type)];
  }

  std::map<std::string, int> columns;
  for (const auto& t : rows)
    for (const auto& [id, n] : t) columns.emplace(id, 0);
  if (options.include_gc) columns.emplace(op::kGC, 0);

  OpDictionary d;
  for (auto& [id, idx] : columns) {
    idx = static_cast<int>(d.ops.size());
    d.ops.push_back({id, classify(id)});
  }
  d.num_blocks = table.size();
  d.counts.assign(static_cast<std::size_t>(d.num_blocks) * d.ops.size(), 0);
  for (int i = 0; i < d.num_blocks; ++i)
    for (const auto& [id, n] : rows[i]) d.at(i, columns[id]) = n;
  return d;
}

std::vector<std::int64_t> case_op_counts(const OpDictionary& dict, const BlockLog& log) {
  if (static_cast<int>(log.counts.size()) != dict.num_blocks)
    throw DimensionError("block log has " + std::to_string(log.counts.size()) +
                         " entries, dictionary has " + std::to_string(dict.num_blocks) + " blocks");
  std::vector<std::int64_t> n(dict.ops.size(), 0);
  for (int i = 0; i < dict.num_blocks; ++i) {
    std::int64_t b = log.counts[i];
    if (b == 0) continue;
    for (int j = 0; j < dict.num_ops(); ++j) n[j] += b * dict.at(i, j);
  }
  return n;
}

std::string dictionary_to_csv(const OpDictionary& dict) {
  std::ostringstream out;
  out << "block";
  for (const auto& o : dict.ops) out << ',' << o.id;
  out << '\n';
  for (int i = 0; i < dict.num_blocks; ++i) {
    out << i;
    for (int j = 0; j < dict.num_ops(); ++j) out << ',' << dict.at(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace emod
