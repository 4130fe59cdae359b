#include "checker.hpp"

#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "emod/error.hpp"

namespace emod::detail {

namespace {

struct Local {
  int slot;
  Type type;
};

[[noreturn]] void type_error(const std::string& msg, Span s) { throw TypeError(msg, s.line, s.col); }
[[noreturn]] void resolve_error(const std::string& msg, Span s) {
  throw ResolveError(msg, s.line, s.col);
}

std::string sig(Type a, Type b) { return "(" + to_string(a) + "," + to_string(b) + ")"; }

Type arith_result(Type a, Type b) { return a.is_float() || b.is_float() ? Type::Float() : Type::Int(); }

bool comparable_refs(Type a, Type b) {
  if (a.is_null() || b.is_null()) return a.is_reference() && b.is_reference();
  return a == b && a.is_reference();
}

class Checker {
 public:
  explicit Checker(Program& p) : p_(p) {}

  void run() {
    index_declarations();
    for (auto& m : p_.methods) check_method(m);
    number_nodes();
  }

 private:
  void index_declarations() {
    for (std::size_t ci = 0; ci < p_.classes.size(); ++ci) {
      const auto& cls = p_.classes[ci];
      class_of_[cls.name] = static_cast<int>(ci);
      auto& fields = fields_[cls.name];
      for (int fi : cls.fields) {
        const Field& f = p_.fields[fi];
        if (!fields.emplace(f.name, fi).second)
          resolve_error("duplicate field '" + f.name + "' in class " + cls.name, f.span);
      }
      auto& methods = methods_[cls.name];
      for (int mi : cls.methods) {
        const Method& m = p_.methods[mi];
        if (fields.count(m.name))
          resolve_error("method '" + m.name + "' clashes with a field", m.span);
        if (!methods.emplace(m.name, mi).second)
          resolve_error("duplicate method '" + m.name + "' in class " + cls.name +
                            " (overloading is not supported)",
                        m.span);
      }
    }
    for (const auto& ext : p_.externs) {
      if (class_of_.count(ext.owner))
        resolve_error("extern owner '" + ext.owner + "' clashes with a declared class", ext.span);
      if (!externs_.emplace(ext.qualified_name(), ext.index).second)
        resolve_error("duplicate extern '" + ext.qualified_name() + "'", ext.span);
    }
  }

  // ---- scopes ---------------------------------------------------------------

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }

  int declare(const std::string& name, Type t, Span s) {
    for (const auto& sc : scopes_) {
      if (sc.count(name)) resolve_error("variable '" + name + "' is already defined", s);
    }
    int slot = next_slot_++;
    scopes_.back().emplace(name, Local{slot, t});
    return slot;
  }

  const Local* find_local(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  const Field* find_field(const std::string& cls, const std::string& name) const {
    auto c = fields_.find(cls);
    if (c == fields_.end()) return nullptr;
    auto f = c->second.find(name);
    return f == c->second.end() ? nullptr : &p_.fields[f->second];
  }

  // Own class first, then the file's top-level members.
  const Field* find_visible_field(const std::string& name) const {
    if (const Field* f = find_field(method_->owner, name)) return f;
    return find_field(kImplicitClass, name);
  }

  // ---- methods / statements -------------------------------------------------

  void check_method(Method& m) {
    method_ = &m;
    next_slot_ = 0;
    scopes_.clear();
    push_scope();
    for (auto& param : m.params) param.slot = declare(param.name, param.type, m.span);
    check_list(*m.body, false);
    pop_scope();
    m.num_slots = next_slot_;
  }

  void check_list(StmtList& list, bool new_scope = true) {
    if (new_scope) push_scope();
    for (auto& s : list.stmts) check_stmt(*s);
    if (new_scope) pop_scope();
  }

  void check_condition(Expr& e, const char* what) {
    check_expr(e);
    if (!e.type.is_boolean())
      type_error(std::string(what) + " condition must be boolean, got " + to_string(e.type), e.span);
  }

  void require_assignable(Type to, Type from, Span s) {
    if (!assignable(to, from))
      type_error("cannot assign " + to_string(from) + " to " + to_string(to), s);
  }

  void check_stmt(Stmt& s) {
    switch (s.kind) {
      case StmtKind::VarDecl:
        if (s.expr) {
          check_expr(*s.expr);
          require_assignable(s.decl_type, s.expr->type, s.expr->span);
        }
        s.slot = declare(s.name, s.decl_type, s.span);
        break;
      case StmtKind::Assign: {
        check_lvalue(*s.target);
        check_expr(*s.expr);
        Type tt = s.target->type;
        Type vt = s.expr->type;
        if (s.assign_op == AssignOp::Set) {
          require_assignable(tt, vt, s.expr->span);
          s.op_result = vt;
        } else {
          if (!tt.is_numeric() || !vt.is_numeric())
            type_error("compound assignment requires numeric operands, got " + sig(tt, vt), s.span);
          s.op_result = arith_result(tt, vt);
          require_assignable(tt, s.op_result, s.span);
        }
        break;
      }
      case StmtKind::ExprStmt:
        check_expr(*s.expr);
        break;
      case StmtKind::If:
        check_condition(*s.expr, "if");
        check_list(*s.body);
        if (s.else_body) check_list(*s.else_body);
        break;
      case StmtKind::For:
        push_scope();
        if (s.init) check_stmt(*s.init);
        check_condition(*s.expr, "for");
        if (s.update) check_stmt(*s.update);
        check_list(*s.body);
        pop_scope();
        break;
      case StmtKind::While:
        check_condition(*s.expr, "while");
        check_list(*s.body);
        break;
      case StmtKind::Switch: {
        check_expr(*s.expr);
        Type st = s.expr->type;
        if (!st.is_int() && !st.is_char())
          type_error("switch scrutinee must be int or char, got " + to_string(st), s.expr->span);
        std::unordered_set<std::int64_t> seen;
        for (auto& c : s.cases) {
          c.label->type = c.label->kind == ExprKind::CharLit ? Type::Char() : Type::Int();
          if (c.label->type != st)
            type_error("case label type " + to_string(c.label->type) +
                           " does not match scrutinee type " + to_string(st),
                       c.label->span);
          if (!seen.insert(c.label->int_value).second)
            type_error("duplicate case label", c.label->span);
          check_list(c.body);
        }
        if (s.else_body) check_list(*s.else_body);
        break;
      }
      case StmtKind::Return: {
        Type rt = method_->return_type;
        if (s.expr) {
          check_expr(*s.expr);
          if (rt.is_void()) type_error("void method returns a value", s.span);
          require_assignable(rt, s.expr->type, s.expr->span);
        } else if (!rt.is_void()) {
          type_error("missing return value in method returning " + to_string(rt), s.span);
        }
        break;
      }
    }
  }

  // ---- expressions ------------------------------------------------------------

  void check_lvalue(Expr& e) {
    check_expr(e);
    if (e.kind != ExprKind::Var && e.kind != ExprKind::Field && e.kind != ExprKind::Index)
      type_error("expression is not assignable", e.span);
  }

  void resolve_name(Expr& e) {
    if (const Local* l = find_local(e.name)) {
      e.kind = ExprKind::Var;
      e.target = l->slot;
      e.type = l->type;
      return;
    }
    if (const Field* f = find_visible_field(e.name)) {
      e.kind = ExprKind::Field;
      e.qualifier.clear();
      e.target = f->index;
      e.type = f->type;
      return;
    }
    resolve_error("unresolved identifier '" + e.name + "'", e.span);
  }

  void resolve_qualified_field(Expr& e) {
    const Local* l = find_local(e.qualifier);
    const Field* own = l ? nullptr : find_visible_field(e.qualifier);
    if (l || own) {
      Type t = l ? l->type : own->type;
      if (!t.array || e.name != "length")
        resolve_error("'" + e.qualifier + "' has no member '" + e.name + "'", e.span);
      auto base = std::make_unique<Expr>();
      base->span = e.span;
      base->name = e.qualifier;
      resolve_name(*base);
      e.kind = ExprKind::Length;
      e.qualifier.clear();
      e.kids.clear();
      e.kids.push_back(std::move(base));
      e.type = Type::Int();
      return;
    }
    if (!class_of_.count(e.qualifier))
      resolve_error("unresolved identifier '" + e.qualifier + "'", e.span);
    const Field* f = find_field(e.qualifier, e.name);
    if (!f) resolve_error("class " + e.qualifier + " has no field '" + e.name + "'", e.span);
    e.target = f->index;
    e.type = f->type;
  }

  void check_call(Expr& e) {
    const std::vector<Type>* params = nullptr;
    std::vector<Type> user_params;
    if (e.qualifier.empty() || class_of_.count(e.qualifier)) {
      std::string owner = e.qualifier.empty() ? method_->owner : e.qualifier;
      if (e.qualifier.empty() && !methods_[owner].count(e.name)) owner = kImplicitClass;
      auto& ms = methods_[owner];
      auto it = ms.find(e.name);
      if (it == ms.end())
        resolve_error("unresolved method '" + owner + "." + e.name + "'", e.span);
      const Method& callee = p_.methods[it->second];
      e.kind = ExprKind::Call;
      e.qualifier = owner;
      e.target = callee.index;
      e.type = callee.return_type;
      for (const auto& prm : callee.params) user_params.push_back(prm.type);
      params = &user_params;
    } else {
      auto it = externs_.find(e.qualifier + "." + e.name);
      if (it == externs_.end())
        resolve_error("unresolved function '" + e.qualifier + "." + e.name + "'", e.span);
      const Extern& ext = p_.externs[it->second];
      e.kind = ExprKind::LibCall;
      e.target = ext.index;
      e.type = ext.return_type;
      params = &ext.params;
    }
    if (params->size() != e.kids.size())
      type_error("'" + e.qualifier + "." + e.name + "' expects " + std::to_string(params->size()) +
                     " argument(s), got " + std::to_string(e.kids.size()),
                 e.span);
    for (std::size_t i = 0; i < e.kids.size(); ++i) {
      check_expr(*e.kids[i]);
      require_assignable((*params)[i], e.kids[i]->type, e.kids[i]->span);
    }
  }

  void check_binary(Expr& e) {
    check_expr(*e.kids[0]);
    check_expr(*e.kids[1]);
    Type a = e.kids[0]->type;
    Type b = e.kids[1]->type;
    e.lhs_type = a;
    e.rhs_type = b;
    auto bad = [&]() {
      type_error(std::string("operator '") + spelling(e.binary_op) + "' cannot be applied to " +
                     sig(a, b),
                 e.span);
    };
    switch (e.binary_op) {
      case BinaryOp::Add:
      case BinaryOp::Sub:
      case BinaryOp::Mul:
      case BinaryOp::Div:
      case BinaryOp::Rem:
        if (!a.is_numeric() || !b.is_numeric()) bad();
        e.type = arith_result(a, b);
        break;
      case BinaryOp::Less:
      case BinaryOp::Greater:
      case BinaryOp::LessEq:
      case BinaryOp::GreaterEq:
        if (!((a.is_numeric() && b.is_numeric()) || (a.is_char() && b.is_char()))) bad();
        e.type = Type::Boolean();
        break;
      case BinaryOp::Eq:
      case BinaryOp::NotEq:
        if (!((a.is_numeric() && b.is_numeric()) || (a.is_char() && b.is_char()) ||
              (a.is_boolean() && b.is_boolean()) || comparable_refs(a, b)))
          bad();
        e.type = Type::Boolean();
        break;
      case BinaryOp::And:
      case BinaryOp::Or:
        if (!a.is_boolean() || !b.is_boolean()) bad();
        e.type = Type::Boolean();
        break;
      case BinaryOp::BitAnd:
      case BinaryOp::BitOr:
      case BinaryOp::Shl:
      case BinaryOp::Shr:
        if (!a.is_int() || !b.is_int()) bad();
        e.type = Type::Int();
        break;
    }
  }

  void check_expr(Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit:
        if (e.int_value > 2147483647LL || e.int_value < -2147483648LL)
          type_error("integer literal out of range", e.span);
        e.type = Type::Int();
        break;
      case ExprKind::FloatLit: e.type = Type::Float(); break;
      case ExprKind::CharLit: e.type = Type::Char(); break;
      case ExprKind::BoolLit: e.type = Type::Boolean(); break;
      case ExprKind::NullLit: e.type = Type::Null(); break;
      case ExprKind::Var: resolve_name(e); break;
      case ExprKind::Field:
        if (e.qualifier.empty()) {
          resolve_name(e);
        } else {
          resolve_qualified_field(e);
        }
        break;
      case ExprKind::Length: e.type = Type::Int(); break;  // produced by resolution only
      case ExprKind::Index: {
        check_expr(*e.kids[0]);
        check_expr(*e.kids[1]);
        if (!e.kids[0]->type.array)
          type_error("indexing a non-array of type " + to_string(e.kids[0]->type), e.span);
        if (!e.kids[1]->type.is_int())
          type_error("array index must be int, got " + to_string(e.kids[1]->type), e.kids[1]->span);
        e.type = e.kids[0]->type.element();
        break;
      }
      case ExprKind::Unary: {
        check_expr(*e.kids[0]);
        Type t = e.kids[0]->type;
        if (e.unary_op == UnaryOp::Neg) {
          if (!t.is_numeric()) type_error("unary '-' cannot be applied to " + to_string(t), e.span);
          e.type = t;
        } else {
          if (!t.is_boolean()) type_error("'!' cannot be applied to " + to_string(t), e.span);
          e.type = Type::Boolean();
        }
        e.lhs_type = t;
        break;
      }
      case ExprKind::Binary: check_binary(e); break;
      case ExprKind::Cast: {
        check_expr(*e.kids[0]);
        Type from = e.kids[0]->type;
        Type to = e.type;
        bool ok = from == to || (from.is_numeric() && to.is_numeric()) ||
                  (from.is_char() && to.is_int()) || (from.is_int() && to.is_char());
        if (!ok) type_error("cannot cast " + to_string(from) + " to " + to_string(to), e.span);
        e.lhs_type = from;
        break;
      }
      case ExprKind::Call:
      case ExprKind::LibCall: check_call(e); break;
      case ExprKind::NewArray:
        check_expr(*e.kids[0]);
        if (!e.kids[0]->type.is_int())
          type_error("array length must be int, got " + to_string(e.kids[0]->type), e.span);
        break;
      case ExprKind::IncDec:
        check_lvalue(*e.kids[0]);
        if (!e.kids[0]->type.is_int())
          type_error(std::string(e.increment ? "'++'" : "'--'") + " requires an int operand, got " +
                         to_string(e.kids[0]->type),
                     e.span);
        e.type = Type::Int();
        break;
    }
  }

  // ---- numbering ------------------------------------------------------------

  void number_nodes() {
    p_.stmt_by_id.clear();
    p_.list_by_id.clear();
    p_.stmt_method.clear();
    expr_count_ = 0;
    for (auto& m : p_.methods) {
      method_ = &m;
      number_list(*m.body);
    }
    p_.num_exprs = expr_count_;
    p_.num_stmts = static_cast<int>(p_.stmt_by_id.size());
    p_.num_lists = static_cast<int>(p_.list_by_id.size());
  }

  void number_list(StmtList& list) {
    list.id = static_cast<int>(p_.list_by_id.size());
    p_.list_by_id.push_back(&list);
    for (auto& s : list.stmts) number_stmt(*s);
  }

  void number_stmt(Stmt& s) {
    s.id = static_cast<int>(p_.stmt_by_id.size());
    p_.stmt_by_id.push_back(&s);
    p_.stmt_method.push_back(method_->index);
    if (s.init) number_stmt(*s.init);
    if (s.target) number_expr(*s.target);
    if (s.expr) number_expr(*s.expr);
    if (s.update) number_stmt(*s.update);
    if (s.body) number_list(*s.body);
    for (auto& c : s.cases) {
      number_expr(*c.label);
      number_list(c.body);
    }
    if (s.else_body) number_list(*s.else_body);
  }

  void number_expr(Expr& e) {
    e.id = expr_count_++;
    for (auto& k : e.kids) number_expr(*k);
  }

  Program& p_;
  Method* method_ = nullptr;
  int next_slot_ = 0;
  int expr_count_ = 0;
  std::vector<std::unordered_map<std::string, Local>> scopes_;
  std::unordered_map<std::string, int> class_of_;
  std::unordered_map<std::string, std::unordered_map<std::string, int>> fields_;
  std::unordered_map<std::string, std::unordered_map<std::string, int>> methods_;
  std::unordered_map<std::string, int> externs_;
};

}  // namespace

void check(Program& program) { Checker(program).run(); }

}  // namespace emod::detail
