#include "emod/runner.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "emod/error.hpp"
#include "emod/ops.hpp"
#include "emod/random.hpp"

namespace emod {

namespace {

constexpr std::int32_t kNull = -1;
constexpr std::int32_t kOpaque = -2;  // non-null Object handed out by library functions
constexpr int kFloatBufferSize = 2112;
constexpr std::int64_t kMaxArrayLength = 1 << 24;

// Every slot starts as all-zero/null, which is the default of every MiniJ type.
struct Value {
  std::int32_t i = 0;
  float f = 0.0f;
  std::int32_t ref = kNull;
};

struct Array {
  std::vector<Value> data;
};

std::int32_t wrap(std::int64_t v) { return static_cast<std::int32_t>(static_cast<std::uint32_t>(v)); }

std::int32_t float_to_int(float f) {
  if (std::isnan(f)) return 0;
  if (f >= 2147483648.0f) return std::numeric_limits<std::int32_t>::max();
  if (f <= -2147483648.0f) return std::numeric_limits<std::int32_t>::min();
  return static_cast<std::int32_t>(f);
}

float as_float(const Value& v, Type t) { return t.is_float() ? v.f : static_cast<float>(v.i); }

Value coerce(Value v, Type from, Type to) {
  if (to.is_float() && !from.is_float()) v.f = static_cast<float>(v.i);
  return v;
}

enum class LibFn : std::uint8_t {
  Opaque,
  Sqrt,
  Abs,
  Max,
  Min,
  Sin,
  Cos,
  Floor,
  Pow,
  Random,
  BufferGet,
  BufferLimit,
  BufferPut,
  BufferPutBuffer,
  BufferReadOnly,
};

LibFn classify_extern(const std::string& q) {
  static const std::unordered_map<std::string, LibFn> known = {
      {"Math.sqrt", LibFn::Sqrt},
      {"Math.abs", LibFn::Abs},
      {"Math.max", LibFn::Max},
      {"Math.min", LibFn::Min},
      {"Math.sin", LibFn::Sin},
      {"Math.cos", LibFn::Cos},
      {"Math.floor", LibFn::Floor},
      {"Math.pow", LibFn::Pow},
      {"Math.random", LibFn::Random},
      {"FloatBuffer.get", LibFn::BufferGet},
      {"FloatBuffer.limit", LibFn::BufferLimit},
      {"FloatBuffer.put", LibFn::BufferPut},
      {"FloatBuffer.putBuffer", LibFn::BufferPutBuffer},
      {"FloatBuffer.asReadOnlyBuffer", LibFn::BufferReadOnly},
  };
  auto it = known.find(q);
  return it == known.end() ? LibFn::Opaque : it->second;
}

class Interpreter {
 public:
  Interpreter(const Program& p, const BlockTable& t, const std::vector<std::string>& op_ids,
              const ExecutionCase& c, const RunOptions& o)
      : p_(p), t_(t), c_(c), o_(o), rng_(Rng::derive(o.seed, static_cast<std::uint64_t>(c.id), 0x72616e64ULL)) {
    removed_.assign(t.blocks.size(), 0);
    for (int b : c.removed) {
      if (b < 0 || b >= t.size()) throw PlanError("case " + std::to_string(c.id) + " removes unknown block " + std::to_string(b));
      if (!t.blocks[b].removable)
        throw PlanError("case " + std::to_string(c.id) + " removes non-removable block " + std::to_string(b));
      removed_[b] = 1;
    }
    for (std::size_t j = 0; j < op_ids.size(); ++j) column_.emplace(op_ids[j], static_cast<int>(j));
    tally_on_ = o.mode == RunMode::TallyOracle;
    result_.case_id = c.id;
    result_.duration_s = c.duration_s;
    result_.log.case_id = c.id;
    result_.log.counts.assign(t.blocks.size(), 0);
    if (tally_on_) {
      result_.tally.assign(op_ids.size(), 0);
      derive_ops();
    }
    lib_fn_.reserve(p.externs.size());
    lib_col_.reserve(p.externs.size());
    for (const auto& x : p.externs) {
      lib_fn_.push_back(classify_extern(x.qualified_name()));
      auto it = column_.find(op::lib(x.qualified_name()));
      lib_col_.push_back(it == column_.end() ? -1 : it->second);
    }
    globals_.resize(p.fields.size());
    for (const auto& f : p.fields) {
      Value& v = globals_[f.index];
      if (f.init_array_length) {
        v.ref = allocate(*f.init_array_length);
      } else if (f.init_number) {
        if (f.type.is_float())
          v.f = static_cast<float>(*f.init_number);
        else
          v.i = static_cast<std::int32_t>(*f.init_number);
      } else if (f.init_bool) {
        v.i = 1;
      }
    }
    buffer_.resize(kFloatBufferSize);
    for (int i = 0; i < kFloatBufferSize; ++i) buffer_[i] = static_cast<float>((i * 7919) % 1000) / 100.0f;
  }

  RunResult run() {
    const Method* init = host("init", 0);
    const Method* update = host("update", 1);
    const Method* on_tap = host("onTap", 2);
    const Method* on_key = host("onKey", 1);
    const Method* main = host("main", 0);

    if (!init && !update) {
      if (main) call(*main, {});
      return finish();
    }
    if (init) call(*init, {});
    int frames = static_cast<int>(std::lround(c_.duration_s * o_.fps));
    std::size_t next_event = 0;
    for (int k = 0; k < frames; ++k) {
      frame_ = k;
      double frame_end_ms = (k + 1) * 1000.0 / o_.fps;
      while (next_event < c_.inputs.size() && c_.inputs[next_event].t_ms < frame_end_ms) {
        const InputEvent& e = c_.inputs[next_event++];
        if (e.kind == "tap" && on_tap) {
          Value x, y;
          x.i = e.payload.size() > 0 ? e.payload[0] : 0;
          y.i = e.payload.size() > 1 ? e.payload[1] : 0;
          call(*on_tap, {x, y});
        } else if (e.kind == "key" && on_key) {
          Value code;
          code.i = e.payload.empty() ? 0 : e.payload[0];
          call(*on_key, {code});
        }
      }
      if (update) {
        Value kv;
        kv.i = k;
        call(*update, {kv});
      }
    }
    result_.frames = frames;
    return finish();
  }

 private:
  RunResult finish() {
    result_.steps = steps_;
    return std::move(result_);
  }

  const Method* host(const char* name, std::size_t arity) {
    const Method* m = p_.find_method(kImplicitClass, name);
    if (!m) return nullptr;
    if (m->params.size() != arity) return nullptr;
    for (const auto& prm : m->params)
      if (!prm.type.is_int()) return nullptr;
    return m;
  }

  // ---- operation columns ----------------------------------------------------

  int column(const std::string& id) {
    auto it = column_.find(id);
    if (it == column_.end()) throw DimensionError("operation '" + id + "' has no tally column");
    return it->second;
  }

  void derive_ops() {
    expr_op_.assign(p_.num_exprs, -1);
    param_ops_.assign(p_.num_exprs, {});
    decl_op_.assign(p_.num_stmts, -1);
    assign_op_.assign(p_.num_stmts, -1);
    arith_op_.assign(p_.num_stmts, -1);
    goto_op_.assign(t_.blocks.size(), -1);
    for (const auto& b : t_.blocks)
      if (b.goto_kind != GotoKind::None) goto_op_[b.id] = column(op::block_goto(b.goto_kind));
    for (const auto& m : p_.methods) derive_list(*m.body, m);
  }

  void derive_list(const StmtList& l, const Method& m) {
    for (const auto& s : l.stmts) derive_stmt(*s, m);
  }

  void derive_stmt(const Stmt& s, const Method& m) {
    switch (s.kind) {
      case StmtKind::VarDecl:
        decl_op_[s.id] = column(op::declaration(s.decl_type));
        if (s.expr) assign_op_[s.id] = column(op::assign(s.decl_type, s.expr->type));
        break;
      case StmtKind::Assign:
        assign_op_[s.id] = column(op::assign(s.target->type, s.op_result));
        if (s.assign_op != AssignOp::Set)
          arith_op_[s.id] = column(op::binary(op::compound_binary(s.assign_op), s.target->type, s.expr->type));
        break;
      case StmtKind::Return:
        if (s.expr) decl_op_[s.id] = column(op::ret(m.return_type));
        break;
      default: break;
    }
    if (s.init) derive_stmt(*s.init, m);
    if (s.target) derive_expr(*s.target);
    if (s.expr) derive_expr(*s.expr);
    if (s.update) derive_stmt(*s.update, m);
    if (s.body) derive_list(*s.body, m);
    for (const auto& c : s.cases) {
      expr_op_[c.label->id] = column(op::binary(BinaryOp::Eq, s.expr->type, c.label->type));
      derive_list(c.body, m);
    }
    if (s.else_body) derive_list(*s.else_body, m);
  }

  void derive_expr(const Expr& e) {
    int& slot = expr_op_[e.id];
    switch (e.kind) {
      case ExprKind::Field:
      case ExprKind::Length: slot = column(op::kFieldReference); break;
      case ExprKind::Index: slot = column(op::kArrayReference); break;
      case ExprKind::Unary:
        slot = column(e.unary_op == UnaryOp::Neg ? op::negation(e.type) : std::string(op::kNot));
        break;
      case ExprKind::Binary: slot = column(op::binary(e.binary_op, e.lhs_type, e.rhs_type)); break;
      case ExprKind::Cast: slot = column(op::conversion(e.lhs_type, e.type)); break;
      case ExprKind::Call:
        slot = column(op::kMethodInvocation);
        for (const auto& prm : p_.methods[e.target].params) param_ops_[e.id].push_back(column(op::parameter(prm.type)));
        break;
      case ExprKind::LibCall: {
        const Extern& x = p_.externs[e.target];
        slot = column(op::lib(x.qualified_name()));
        for (Type t : x.params) param_ops_[e.id].push_back(column(op::parameter(t)));
        break;
      }
      case ExprKind::NewArray: slot = column(op::new_array(e.type.element())); break;
      case ExprKind::IncDec: slot = column(e.increment ? op::kIncrement : op::kDecrement); break;
      default: break;
    }
    for (const auto& k : e.kids) derive_expr(*k);
  }

  void count(int col) {
    if (tally_on_) ++result_.tally[col];
  }
  void count_expr(const Expr& e) {
    if (tally_on_) ++result_.tally[expr_op_[e.id]];
  }

  // ---- control --------------------------------------------------------------

  void step() {
    if (++steps_ > o_.step_limit)
      throw StepLimitExceeded("step limit of " + std::to_string(o_.step_limit) + " exceeded in case " +
                              std::to_string(c_.id));
  }

  void enter(int block) {
    step();
    if (removed_[block] && !o_.log_removed) return;
    ++result_.log.counts[block];
    if (o_.full_log) result_.entries.push_back(block);
    if (tally_on_ && goto_op_[block] >= 0) ++result_.tally[goto_op_[block]];
  }

  bool skipped(const Stmt& s) const { return removed_[t_.stmt_block[s.id]] != 0; }

  Value call(const Method& m, const std::vector<Value>& args) {
    if (++depth_ > o_.max_call_depth)
      throw RuntimeFault("call depth limit exceeded in " + m.qualified_name());
    std::size_t saved_base = base_;
    base_ = stack_.size();
    stack_.resize(base_ + static_cast<std::size_t>(m.num_slots));
    for (std::size_t i = 0; i < args.size(); ++i) stack_[base_ + m.params[i].slot] = args[i];
    enter(t_.method_entry[m.index]);
    exec_list(*m.body);
    Value out = returning_ ? ret_ : Value{};
    returning_ = false;
    stack_.resize(base_);
    base_ = saved_base;
    --depth_;
    return out;
  }

  void exec_list(const StmtList& l) {
    for (const auto& sp : l.stmts) {
      const Stmt& s = *sp;
      int starts = t_.stmt_starts[s.id];
      if (starts >= 0) enter(starts);
      exec(s);
      if (returning_) return;
    }
  }

  void enter_list(const StmtList& l) {
    enter(t_.list_entry[l.id]);
    exec_list(l);
  }

  bool condition(const Expr& e) { return eval(e).i != 0; }

  void exec(const Stmt& s) {
    step();
    switch (s.kind) {
      case StmtKind::VarDecl: {
        if (skipped(s)) return;
        count(decl_op(s));
        Value v;
        if (s.expr) {
          v = coerce(eval(*s.expr), s.expr->type, s.decl_type);
          count(assign_op(s));
        }
        local(s.slot) = v;
        return;
      }
      case StmtKind::Assign: {
        if (skipped(s)) return;
        Place place = resolve(*s.target);
        Value v = eval(*s.expr);
        Type vt = s.expr->type;
        if (s.assign_op != AssignOp::Set) {
          count(arith_op(s));
          v = arith(op::compound_binary(s.assign_op), read(place), s.target->type, v, vt);
          vt = s.op_result;
        }
        count(assign_op(s));
        write(place, coerce(v, vt, s.target->type));
        return;
      }
      case StmtKind::ExprStmt:
        if (!skipped(s)) eval(*s.expr);
        return;
      case StmtKind::Return: {
        if (skipped(s)) return;
        const Method& m = p_.methods[p_.stmt_method[s.id]];
        if (s.expr) {
          ret_ = coerce(eval(*s.expr), s.expr->type, m.return_type);
          count(decl_op(s));
        } else {
          ret_ = Value{};
        }
        returning_ = true;
        return;
      }
      case StmtKind::If: {
        bool cond = skipped(s) ? false : condition(*s.expr);
        if (cond)
          enter_list(*s.body);
        else if (s.else_body)
          enter_list(*s.else_body);
        return;
      }
      case StmtKind::For: {
        enter(t_.for_init[s.id]);
        if (s.init) exec(*s.init);
        for (;;) {
          enter(t_.for_header[s.id]);
          if (!condition(*s.expr)) break;
          enter_list(*s.body);
          if (returning_) return;
          enter(t_.for_update[s.id]);
          if (s.update) exec(*s.update);
        }
        return;
      }
      case StmtKind::While: {
        for (;;) {
          enter(t_.while_header[s.id]);
          if (!condition(*s.expr)) break;
          enter_list(*s.body);
          if (returning_) return;
        }
        return;
      }
      case StmtKind::Switch: {
        Value scrutinee;
        bool matched = false;
        std::size_t k = 0;
        if (!s.cases.empty()) {
          if (!skipped(s)) {
            scrutinee = eval(*s.expr);
            count_expr(*s.cases[0].label);
            matched = scrutinee.i == static_cast<std::int32_t>(s.cases[0].label->int_value);
          }
          while (!matched && ++k < s.cases.size()) {
            enter(t_.switch_headers[s.id][k - 1]);
            count_expr(*s.cases[k].label);
            matched = scrutinee.i == static_cast<std::int32_t>(s.cases[k].label->int_value);
          }
        } else if (!skipped(s)) {
          eval(*s.expr);
        }
        if (matched)
          enter_list(s.cases[k].body);
        else if (s.else_body)
          enter_list(*s.else_body);
        return;
      }
    }
  }

  int decl_op(const Stmt& s) const { return tally_on_ ? decl_op_[s.id] : -1; }
  int assign_op(const Stmt& s) const { return tally_on_ ? assign_op_[s.id] : -1; }
  int arith_op(const Stmt& s) const { return tally_on_ ? arith_op_[s.id] : -1; }

  // ---- storage --------------------------------------------------------------

  Value& local(int slot) { return stack_[base_ + static_cast<std::size_t>(slot)]; }

  std::int32_t allocate(std::int64_t n) {
    if (n < 0) n = 0;
    if (n > kMaxArrayLength) n = kMaxArrayLength;
    heap_.push_back(Array{std::vector<Value>(static_cast<std::size_t>(n))});
    return static_cast<std::int32_t>(heap_.size() - 1);
  }

  Array* array(std::int32_t ref) { return ref >= 0 ? &heap_[static_cast<std::size_t>(ref)] : nullptr; }

  enum class PlaceKind : std::uint8_t { Local, Global, Element };
  struct Place {
    PlaceKind kind;
    int index;
    std::int32_t ref = kNull;
  };

  Place resolve(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Var: return {PlaceKind::Local, e.target};
      case ExprKind::Field: count_expr(e); return {PlaceKind::Global, e.target};
      case ExprKind::Index: {
        Value a = eval(*e.kids[0]);
        Value i = eval(*e.kids[1]);
        count_expr(e);
        return {PlaceKind::Element, i.i, a.ref};
      }
      default: throw RuntimeFault("assignment to a non-lvalue expression");
    }
  }

  Value read(const Place& pl) {
    switch (pl.kind) {
      case PlaceKind::Local: return local(pl.index);
      case PlaceKind::Global: return globals_[pl.index];
      case PlaceKind::Element: {
        Array* a = array(pl.ref);
        if (!a || pl.index < 0 || static_cast<std::size_t>(pl.index) >= a->data.size()) return Value{};
        return a->data[pl.index];
      }
    }
    return Value{};
  }

  void write(const Place& pl, Value v) {
    switch (pl.kind) {
      case PlaceKind::Local: local(pl.index) = v; return;
      case PlaceKind::Global: globals_[pl.index] = v; return;
      case PlaceKind::Element: {
        Array* a = array(pl.ref);
        if (a && pl.index >= 0 && static_cast<std::size_t>(pl.index) < a->data.size()) a->data[pl.index] = v;
        return;
      }
    }
  }

  // ---- expressions ----------------------------------------------------------

  static Value arith(BinaryOp op, Value a, Type ta, Value b, Type tb) {
    Value r;
    if (ta.is_float() || tb.is_float()) {
      float x = as_float(a, ta), y = as_float(b, tb);
      switch (op) {
        case BinaryOp::Add: r.f = x + y; break;
        case BinaryOp::Sub: r.f = x - y; break;
        case BinaryOp::Mul: r.f = x * y; break;
        case BinaryOp::Div: r.f = x / y; break;
        case BinaryOp::Rem: r.f = std::fmod(x, y); break;
        default: break;
      }
      return r;
    }
    std::int64_t x = a.i, y = b.i;
    switch (op) {
      case BinaryOp::Add: r.i = wrap(x + y); break;
      case BinaryOp::Sub: r.i = wrap(x - y); break;
      case BinaryOp::Mul: r.i = wrap(x * y); break;
      case BinaryOp::Div: r.i = y == 0 ? 0 : wrap(x / y); break;
      case BinaryOp::Rem: r.i = y == 0 ? 0 : wrap(x % y); break;
      default: break;
    }
    return r;
  }

  static Value binary(const Expr& e, Value a, Value b) {
    Type ta = e.lhs_type, tb = e.rhs_type;
    Value r;
    switch (e.binary_op) {
      case BinaryOp::Add:
      case BinaryOp::Sub:
      case BinaryOp::Mul:
      case BinaryOp::Div:
      case BinaryOp::Rem: return arith(e.binary_op, a, ta, b, tb);
      case BinaryOp::Less:
      case BinaryOp::Greater:
      case BinaryOp::LessEq:
      case BinaryOp::GreaterEq:
      case BinaryOp::Eq:
      case BinaryOp::NotEq: {
        int cmp;
        if (ta.is_reference()) {
          cmp = a.ref == b.ref ? 0 : 1;
        } else if (ta.is_float() || tb.is_float()) {
          float x = as_float(a, ta), y = as_float(b, tb);
          if (std::isnan(x) || std::isnan(y)) {
            r.i = e.binary_op == BinaryOp::NotEq;
            return r;
          }
          cmp = x < y ? -1 : (x > y ? 1 : 0);
        } else {
          cmp = a.i < b.i ? -1 : (a.i > b.i ? 1 : 0);
        }
        switch (e.binary_op) {
          case BinaryOp::Less: r.i = cmp < 0; break;
          case BinaryOp::Greater: r.i = cmp > 0; break;
          case BinaryOp::LessEq: r.i = cmp <= 0; break;
          case BinaryOp::GreaterEq: r.i = cmp >= 0; break;
          case BinaryOp::Eq: r.i = cmp == 0; break;
          default: r.i = cmp != 0; break;
        }
        return r;
      }
      case BinaryOp::And: r.i = (a.i != 0) && (b.i != 0); return r;
      case BinaryOp::Or: r.i = (a.i != 0) || (b.i != 0); return r;
      case BinaryOp::BitAnd: r.i = a.i & b.i; return r;
      case BinaryOp::BitOr: r.i = a.i | b.i; return r;
      case BinaryOp::Shl: r.i = wrap(static_cast<std::int64_t>(static_cast<std::uint32_t>(a.i) << (b.i & 31))); return r;
      case BinaryOp::Shr: r.i = a.i >> (b.i & 31); return r;
    }
    return r;
  }

  static Value convert(Value v, Type from, Type to) {
    Value r;
    if (to.is_float()) {
      r.f = as_float(v, from);
    } else if (to.is_int()) {
      r.i = from.is_float() ? float_to_int(v.f) : v.i;
    } else if (to.is_char()) {
      r.i = static_cast<std::uint16_t>(from.is_float() ? float_to_int(v.f) : v.i);
    } else {
      r = v;
    }
    return r;
  }

  std::vector<Value> arguments(const Expr& e, const std::vector<Type>& params) {
    std::vector<Value> args;
    args.reserve(e.kids.size());
    for (std::size_t i = 0; i < e.kids.size(); ++i)
      args.push_back(coerce(eval(*e.kids[i]), e.kids[i]->type, params[i]));
    if (tally_on_)
      for (int col : param_ops_[e.id]) ++result_.tally[col];
    return args;
  }

  Value eval(const Expr& e) {
    Value v;
    switch (e.kind) {
      case ExprKind::IntLit:
      case ExprKind::CharLit: v.i = static_cast<std::int32_t>(e.int_value); return v;
      case ExprKind::FloatLit: v.f = static_cast<float>(e.float_value); return v;
      case ExprKind::BoolLit: v.i = e.bool_value ? 1 : 0; return v;
      case ExprKind::NullLit: return v;
      case ExprKind::Var: return local(e.target);
      case ExprKind::Field: count_expr(e); return globals_[e.target];
      case ExprKind::Index: {
        Value a = eval(*e.kids[0]);
        Value i = eval(*e.kids[1]);
        count_expr(e);
        return read({PlaceKind::Element, i.i, a.ref});
      }
      case ExprKind::Length: {
        Value a = eval(*e.kids[0]);
        count_expr(e);
        Array* arr = array(a.ref);
        v.i = arr ? static_cast<std::int32_t>(arr->data.size()) : 0;
        return v;
      }
      case ExprKind::Unary: {
        Value x = eval(*e.kids[0]);
        count_expr(e);
        if (e.unary_op == UnaryOp::Not) {
          v.i = x.i == 0;
        } else if (e.type.is_float()) {
          v.f = -x.f;
        } else {
          v.i = wrap(-static_cast<std::int64_t>(x.i));
        }
        return v;
      }
      case ExprKind::Binary: {
        Value a = eval(*e.kids[0]);
        Value b = eval(*e.kids[1]);
        count_expr(e);
        return binary(e, a, b);
      }
      case ExprKind::Cast: {
        Value x = eval(*e.kids[0]);
        count_expr(e);
        return convert(x, e.lhs_type, e.type);
      }
      case ExprKind::Call: {
        const Method& m = p_.methods[e.target];
        std::vector<Type> types;
        types.reserve(m.params.size());
        for (const auto& prm : m.params) types.push_back(prm.type);
        std::vector<Value> args = arguments(e, types);
        count_expr(e);
        return call(m, args);
      }
      case ExprKind::LibCall: {
        const Extern& x = p_.externs[e.target];
        std::vector<Value> args = arguments(e, x.params);
        count_expr(e);
        if (o_.trace_library) result_.library_calls.push_back({lib_col_[e.target], frame_});
        return library(x, lib_fn_[e.target], args);
      }
      case ExprKind::NewArray: {
        Value n = eval(*e.kids[0]);
        count_expr(e);
        v.ref = allocate(n.i);
        return v;
      }
      case ExprKind::IncDec: {
        Place pl = resolve(*e.kids[0]);
        count_expr(e);
        Value old = read(pl);
        Value now = old;
        now.i = wrap(static_cast<std::int64_t>(old.i) + (e.increment ? 1 : -1));
        write(pl, now);
        return e.prefix ? now : old;
      }
    }
    return v;
  }

  // ---- library --------------------------------------------------------------

  Value library(const Extern& x, LibFn fn, const std::vector<Value>& args) {
    auto arg = [&](std::size_t i) -> double {
      if (i >= args.size()) return 0.0;
      Type t = x.params[i];
      return t.is_float() ? static_cast<double>(args[i].f) : static_cast<double>(args[i].i);
    };
    double r = 0.0;
    Value out;
    switch (fn) {
      case LibFn::Sqrt: r = std::sqrt(arg(0)); break;
      case LibFn::Abs: r = std::fabs(arg(0)); break;
      case LibFn::Max: r = std::max(arg(0), arg(1)); break;
      case LibFn::Min: r = std::min(arg(0), arg(1)); break;
      case LibFn::Sin: r = std::sin(arg(0)); break;
      case LibFn::Cos: r = std::cos(arg(0)); break;
      case LibFn::Floor: r = std::floor(arg(0)); break;
      case LibFn::Pow: r = std::pow(arg(0), arg(1)); break;
      case LibFn::Random: r = rng_.uniform(); break;
      case LibFn::BufferGet: {
        auto i = static_cast<std::int64_t>(arg(0));
        r = i >= 0 && i < kFloatBufferSize ? buffer_[static_cast<std::size_t>(i)] : 0.0;
        break;
      }
      case LibFn::BufferLimit: r = kFloatBufferSize; break;
      case LibFn::BufferPut:
      case LibFn::BufferPutBuffer:
      case LibFn::Opaque: return out;
      case LibFn::BufferReadOnly:
        if (x.return_type.is_reference()) out.ref = kOpaque;
        return out;
    }
    Type rt = x.return_type;
    if (rt.is_float()) {
      out.f = static_cast<float>(r);
    } else if (rt.is_int() || rt.is_char()) {
      out.i = float_to_int(static_cast<float>(r));
      if (std::fabs(r) < 2147483648.0) out.i = static_cast<std::int32_t>(r);
      if (rt.is_char()) out.i = static_cast<std::uint16_t>(out.i);
    } else if (rt.is_boolean()) {
      out.i = r != 0.0;
    }
    return out;
  }

  const Program& p_;
  const BlockTable& t_;
  const ExecutionCase& c_;
  const RunOptions& o_;
  Rng rng_;

  std::unordered_map<std::string, int> column_;
  bool tally_on_ = false;
  std::vector<int> expr_op_;
  std::vector<std::vector<int>> param_ops_;
  std::vector<int> decl_op_, assign_op_, arith_op_;
  std::vector<int> goto_op_;
  std::vector<LibFn> lib_fn_;
  std::vector<int> lib_col_;

  std::vector<char> removed_;
  std::vector<Value> globals_;
  std::vector<Value> stack_;
  std::size_t base_ = 0;
  std::vector<Array> heap_;
  std::vector<float> buffer_;

  Value ret_;
  bool returning_ = false;
  int depth_ = 0;
  int frame_ = 0;
  std::int64_t steps_ = 0;
  RunResult result_;
};

}  // namespace

RunResult run(const Program& program, const BlockTable& table, const std::vector<std::string>& op_ids,
              const ExecutionCase& c, const RunOptions& options) {
  return Interpreter(program, table, op_ids, c, options).run();
}

double simulated_workload_time(const std::vector<std::int64_t>& counts, const std::vector<double>& op_time_s,
                               double target_s) {
  if (counts.size() != op_time_s.size())
    throw DimensionError("time model covers " + std::to_string(op_time_s.size()) + " operations, counts have " +
                         std::to_string(counts.size()));
  double work = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) work += static_cast<double>(counts[j]) * op_time_s[j];
  return std::max(work, target_s);
}

double simulated_workload_time(const RunResult& result, const std::vector<double>& op_time_s) {
  if (result.tally.empty()) throw DimensionError("run result carries no operation tally");
  return simulated_workload_time(result.tally, op_time_s, result.duration_s);
}

std::string block_log_to_csv(const BlockLog& log) {
  std::ostringstream out;
  out << "block_id,count\n";
  for (std::size_t i = 0; i < log.counts.size(); ++i) out << i << ',' << log.counts[i] << '\n';
  return out.str();
}

BlockLog block_log_from_csv(const std::string& text, int case_id) {
  BlockLog log;
  log.case_id = case_id;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("block_id", 0) == 0) continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw DimensionError("malformed block log row: " + line);
    std::size_t id = std::stoul(line.substr(0, comma));
    if (id != log.counts.size()) throw DimensionError("block log rows out of order at block " + std::to_string(id));
    log.counts.push_back(std::stoll(line.substr(comma + 1)));
  }
  return log;
}

}  // namespace emod
