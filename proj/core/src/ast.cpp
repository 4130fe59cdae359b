#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "emod/error.hpp"
#include "emod/frontend.hpp"
#include "json.hpp"

namespace emod {

std::string to_string(Type t) {
  std::string s;
  switch (t.base) {
    case BaseType::Void: s = "void"; break;
    case BaseType::Int: s = "int"; break;
    case BaseType::Float: s = "float"; break;
    case BaseType::Char: s = "char"; break;
    case BaseType::Boolean: s = "boolean"; break;
    case BaseType::Object: s = "Object"; break;
    case BaseType::Null: s = "null"; break;
  }
  if (t.array) s += "[]";
  return s;
}

bool assignable(Type to, Type from) {
  if (to == from) return !to.is_void() && !to.is_null();
  if (to.is_float() && (from.is_int() || from.is_char())) return true;
  if (to.is_int() && from.is_char()) return true;
  if (from.is_null()) return to.is_reference() && !to.is_null();
  return false;
}

const char* spelling(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Rem: return "%";
    case BinaryOp::Less: return "<";
    case BinaryOp::Greater: return ">";
    case BinaryOp::LessEq: return "<=";
    case BinaryOp::GreaterEq: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::NotEq: return "!=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
    case BinaryOp::BitAnd: return "&";
    case BinaryOp::BitOr: return "|";
    case BinaryOp::Shl: return "<<";
    case BinaryOp::Shr: return ">>";
  }
  return "?";
}

const Method* Program::find_method(const std::string& owner, const std::string& name) const {
  for (const auto& m : methods)
    if (m.owner == owner && m.name == name) return &m;
  return nullptr;
}

const Extern* Program::find_extern(const std::string& owner, const std::string& name) const {
  for (const auto& e : externs)
    if (e.owner == owner && e.name == name) return &e;
  return nullptr;
}

Program parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read program file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {

template <typename F>
void walk_expr(const Expr& e, F&& f) {
  f(e);
  for (const auto& k : e.kids) walk_expr(*k, f);
}

template <typename F>
void walk_list(const StmtList& list, F&& f);

template <typename F>
void walk_stmt(const Stmt& s, F&& f) {
  if (s.init) walk_stmt(*s.init, f);
  if (s.target) walk_expr(*s.target, f);
  if (s.expr) walk_expr(*s.expr, f);
  if (s.update) walk_stmt(*s.update, f);
  if (s.body) walk_list(*s.body, f);
  for (const auto& c : s.cases) walk_list(c.body, f);
  if (s.else_body) walk_list(*s.else_body, f);
}

template <typename F>
void walk_list(const StmtList& list, F&& f) {
  for (const auto& s : list.stmts) walk_stmt(*s, f);
}

// ---- pretty printer ---------------------------------------------------------

std::string number_literal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string char_literal(std::int64_t c) {
  switch (c) {
    case '\n': return "'\\n'";
    case '\t': return "'\\t'";
    case '\0': return "'\\0'";
    case '\\': return "'\\\\'";
    case '\'': return "'\\''";
    default: return std::string("'") + static_cast<char>(c) + "'";
  }
}

class Printer {
 public:
  explicit Printer(const Program& p) : p_(p) {}

  std::string run() {
    for (const auto& ext : p_.externs) {
      out_ << "extern " << ext.qualified_name() << "(";
      for (std::size_t i = 0; i < ext.params.size(); ++i)
        out_ << (i ? ", " : "") << to_string(ext.params[i]);
      out_ << ") -> " << to_string(ext.return_type) << ";\n";
    }
    for (const auto& cls : p_.classes) {
      if (cls.implicit) {
        members(cls);
      } else {
        out_ << "\nclass " << cls.name << " {\n";
        ++depth_;
        members(cls);
        --depth_;
        out_ << "}\n";
      }
    }
    return out_.str();
  }

 private:
  void indent() {
    for (int i = 0; i < depth_; ++i) out_ << "  ";
  }

  void members(const ClassDecl& cls) {
    for (int fi : cls.fields) {
      const Field& f = p_.fields[fi];
      indent();
      out_ << to_string(f.type) << " " << f.name;
      if (f.init_array_length) {
        out_ << " = new " << to_string(f.type.element()) << "[" << *f.init_array_length << "]";
      } else if (f.init_number) {
        if (f.type.is_float())
          out_ << " = " << number_literal(*f.init_number);
        else if (f.type.is_char())
          out_ << " = " << char_literal(static_cast<std::int64_t>(*f.init_number));
        else
          out_ << " = " << static_cast<std::int64_t>(*f.init_number);
      } else if (f.type.is_boolean() && f.init_bool) {
        out_ << " = true";
      }
      out_ << ";\n";
    }
    for (int mi : cls.methods) {
      const Method& m = p_.methods[mi];
      out_ << "\n";
      indent();
      out_ << to_string(m.return_type) << " " << m.name << "(";
      for (std::size_t i = 0; i < m.params.size(); ++i)
        out_ << (i ? ", " : "") << to_string(m.params[i].type) << " " << m.params[i].name;
      out_ << ") ";
      list(*m.body);
      out_ << "\n";
    }
  }

  void list(const StmtList& l) {
    out_ << "{\n";
    ++depth_;
    for (const auto& s : l.stmts) stmt(*s);
    --depth_;
    indent();
    out_ << "}";
  }

  void simple(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::VarDecl:
        out_ << to_string(s.decl_type) << " " << s.name;
        if (s.expr) out_ << " = " << expr(*s.expr);
        break;
      case StmtKind::Assign: {
        static const char* ops[] = {"=", "+=", "-=", "*=", "/="};
        out_ << expr(*s.target) << " " << ops[static_cast<int>(s.assign_op)] << " " << expr(*s.expr);
        break;
      }
      case StmtKind::ExprStmt: out_ << expr(*s.expr); break;
      default: break;
    }
  }

  void stmt(const Stmt& s) {
    indent();
    switch (s.kind) {
      case StmtKind::VarDecl:
      case StmtKind::Assign:
      case StmtKind::ExprStmt:
        simple(s);
        out_ << ";\n";
        return;
      case StmtKind::Return:
        out_ << "return";
        if (s.expr) out_ << " " << expr(*s.expr);
        out_ << ";\n";
        return;
      case StmtKind::If:
        out_ << "if (" << expr(*s.expr) << ") ";
        list(*s.body);
        if (s.else_body) {
          out_ << " else ";
          list(*s.else_body);
        }
        out_ << "\n";
        return;
      case StmtKind::For:
        out_ << "for (";
        if (s.init) simple(*s.init);
        out_ << "; " << expr(*s.expr) << "; ";
        if (s.update) simple(*s.update);
        out_ << ") ";
        list(*s.body);
        out_ << "\n";
        return;
      case StmtKind::While:
        out_ << "while (" << expr(*s.expr) << ") ";
        list(*s.body);
        out_ << "\n";
        return;
      case StmtKind::Switch:
        out_ << "switch (" << expr(*s.expr) << ") {\n";
        ++depth_;
        for (const auto& c : s.cases) {
          indent();
          out_ << "case " << expr(*c.label) << ":\n";
          ++depth_;
          for (const auto& cs : c.body.stmts) stmt(*cs);
          --depth_;
        }
        if (s.else_body) {
          indent();
          out_ << "default:\n";
          ++depth_;
          for (const auto& cs : s.else_body->stmts) stmt(*cs);
          --depth_;
        }
        --depth_;
        indent();
        out_ << "}\n";
        return;
    }
  }

  std::string args(const Expr& e) {
    std::string s = "(";
    for (std::size_t i = 0; i < e.kids.size(); ++i) s += (i ? ", " : "") + expr(*e.kids[i]);
    return s + ")";
  }

  std::string expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return std::to_string(e.int_value);
      case ExprKind::FloatLit: return number_literal(e.float_value);
      case ExprKind::CharLit: return char_literal(e.int_value);
      case ExprKind::BoolLit: return e.bool_value ? "true" : "false";
      case ExprKind::NullLit: return "null";
      case ExprKind::Var: return e.name;
      case ExprKind::Field: return e.qualifier.empty() ? e.name : e.qualifier + "." + e.name;
      case ExprKind::Index: return expr(*e.kids[0]) + "[" + expr(*e.kids[1]) + "]";
      case ExprKind::Length: return expr(*e.kids[0]) + ".length";
      case ExprKind::Unary:
        return std::string(e.unary_op == UnaryOp::Neg ? "-" : "!") + "(" + expr(*e.kids[0]) + ")";
      case ExprKind::Binary:
        return "(" + expr(*e.kids[0]) + " " + spelling(e.binary_op) + " " + expr(*e.kids[1]) + ")";
      case ExprKind::Cast: return "((" + to_string(e.type) + ") " + expr(*e.kids[0]) + ")";
      case ExprKind::Call:
      case ExprKind::LibCall: {
        std::string callee = e.qualifier.empty() ? e.name : e.qualifier + "." + e.name;
        return callee + args(e);
      }
      case ExprKind::NewArray:
        return "new " + to_string(e.type.element()) + "[" + expr(*e.kids[0]) + "]";
      case ExprKind::IncDec: {
        const char* op = e.increment ? "++" : "--";
        return e.prefix ? op + expr(*e.kids[0]) : expr(*e.kids[0]) + op;
      }
    }
    return "";
  }

  const Program& p_;
  std::ostringstream out_;
  int depth_ = 0;
};

// ---- JSON dump ------------------------------------------------------------------

const char* kind_name(ExprKind k) {
  switch (k) {
    case ExprKind::IntLit: return "IntLit";
    case ExprKind::FloatLit: return "FloatLit";
    case ExprKind::CharLit: return "CharLit";
    case ExprKind::BoolLit: return "BoolLit";
    case ExprKind::NullLit: return "NullLit";
    case ExprKind::Var: return "Var";
    case ExprKind::Field: return "Field";
    case ExprKind::Index: return "Index";
    case ExprKind::Length: return "Length";
    case ExprKind::Unary: return "Unary";
    case ExprKind::Binary: return "Binary";
    case ExprKind::Cast: return "Cast";
    case ExprKind::Call: return "Call";
    case ExprKind::LibCall: return "LibCall";
    case ExprKind::NewArray: return "NewArray";
    case ExprKind::IncDec: return "IncDec";
  }
  return "?";
}

const char* kind_name(StmtKind k) {
  switch (k) {
    case StmtKind::VarDecl: return "VarDecl";
    case StmtKind::Assign: return "Assign";
    case StmtKind::ExprStmt: return "ExprStmt";
    case StmtKind::If: return "If";
    case StmtKind::For: return "For";
    case StmtKind::While: return "While";
    case StmtKind::Switch: return "Switch";
    case StmtKind::Return: return "Return";
  }
  return "?";
}

using nlohmann::ordered_json;

class Dumper {
 public:
  explicit Dumper(bool spans) : spans_(spans) {}

  ordered_json program(const Program& p) {
    ordered_json j;
    ordered_json exts = ordered_json::array();
    for (const auto& e : p.externs) {
      ordered_json x;
      x["name"] = e.qualified_name();
      ordered_json params = ordered_json::array();
      for (Type t : e.params) params.push_back(to_string(t));
      x["params"] = params;
      x["returns"] = to_string(e.return_type);
      exts.push_back(x);
    }
    j["externs"] = exts;
    ordered_json classes = ordered_json::array();
    for (const auto& c : p.classes) {
      ordered_json cj;
      cj["name"] = c.name;
      cj["implicit"] = c.implicit;
      ordered_json fields = ordered_json::array();
      for (int fi : c.fields) {
        const Field& f = p.fields[fi];
        ordered_json fj;
        fj["name"] = f.name;
        fj["type"] = to_string(f.type);
        if (f.init_number) fj["init"] = *f.init_number;
        if (f.init_bool) fj["init"] = true;
        if (f.init_array_length) fj["length"] = *f.init_array_length;
        fields.push_back(fj);
      }
      cj["fields"] = fields;
      ordered_json methods = ordered_json::array();
      for (int mi : c.methods) {
        const Method& m = p.methods[mi];
        ordered_json mj;
        mj["name"] = m.name;
        mj["returns"] = to_string(m.return_type);
        ordered_json params = ordered_json::array();
        for (const auto& prm : m.params)
          params.push_back({{"name", prm.name}, {"type", to_string(prm.type)}});
        mj["params"] = params;
        mj["body"] = list(*m.body);
        methods.push_back(mj);
      }
      cj["methods"] = methods;
      classes.push_back(cj);
    }
    j["classes"] = classes;
    return j;
  }

 private:
  void span(ordered_json& j, Span s) {
    if (spans_) j["span"] = {s.line, s.col};
  }

  ordered_json list(const StmtList& l) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : l.stmts) arr.push_back(stmt(*s));
    return arr;
  }

  ordered_json stmt(const Stmt& s) {
    ordered_json j;
    j["stmt"] = kind_name(s.kind);
    span(j, s.span);
    switch (s.kind) {
      case StmtKind::VarDecl:
        j["type"] = to_string(s.decl_type);
        j["name"] = s.name;
        if (s.expr) j["init"] = expr(*s.expr);
        break;
      case StmtKind::Assign: {
        static const char* ops[] = {"=", "+=", "-=", "*=", "/="};
        j["op"] = ops[static_cast<int>(s.assign_op)];
        j["target"] = expr(*s.target);
        j["value"] = expr(*s.expr);
        break;
      }
      case StmtKind::ExprStmt: j["expr"] = expr(*s.expr); break;
      case StmtKind::Return:
        if (s.expr) j["value"] = expr(*s.expr);
        break;
      case StmtKind::If:
        j["cond"] = expr(*s.expr);
        j["then"] = list(*s.body);
        if (s.else_body) j["else"] = list(*s.else_body);
        break;
      case StmtKind::For:
        if (s.init) j["init"] = stmt(*s.init);
        j["cond"] = expr(*s.expr);
        if (s.update) j["update"] = stmt(*s.update);
        j["body"] = list(*s.body);
        break;
      case StmtKind::While:
        j["cond"] = expr(*s.expr);
        j["body"] = list(*s.body);
        break;
      case StmtKind::Switch: {
        j["scrutinee"] = expr(*s.expr);
        ordered_json cases = ordered_json::array();
        for (const auto& c : s.cases)
          cases.push_back({{"label", c.label->int_value}, {"body", list(c.body)}});
        j["cases"] = cases;
        if (s.else_body) j["default"] = list(*s.else_body);
        break;
      }
    }
    return j;
  }

  ordered_json expr(const Expr& e) {
    ordered_json j;
    j["expr"] = kind_name(e.kind);
    j["type"] = to_string(e.type);
    span(j, e.span);
    switch (e.kind) {
      case ExprKind::IntLit:
      case ExprKind::CharLit: j["value"] = e.int_value; break;
      case ExprKind::FloatLit: j["value"] = e.float_value; break;
      case ExprKind::BoolLit: j["value"] = e.bool_value; break;
      case ExprKind::Var: j["name"] = e.name; break;
      case ExprKind::Field:
      case ExprKind::Call:
      case ExprKind::LibCall:
        j["name"] = e.qualifier.empty() ? e.name : e.qualifier + "." + e.name;
        break;
      case ExprKind::Unary: j["op"] = e.unary_op == UnaryOp::Neg ? "-" : "!"; break;
      case ExprKind::Binary:
        j["op"] = spelling(e.binary_op);
        j["operand_types"] = {to_string(e.lhs_type), to_string(e.rhs_type)};
        break;
      case ExprKind::Cast: j["from"] = to_string(e.lhs_type); break;
      case ExprKind::IncDec:
        j["op"] = e.increment ? "++" : "--";
        j["prefix"] = e.prefix;
        break;
      default: break;
    }
    if (!e.kids.empty()) {
      ordered_json kids = ordered_json::array();
      for (const auto& k : e.kids) kids.push_back(expr(*k));
      j["kids"] = kids;
    }
    return j;
  }

  bool spans_;
};

}  // namespace

std::vector<std::string> list_library_functions(const Program& program) {
  std::set<std::string> names;
  for (const auto& m : program.methods) {
    walk_list(*m.body, [&](const Expr& e) {
      if (e.kind == ExprKind::LibCall) names.insert(program.externs[e.target].qualified_name());
    });
  }
  return {names.begin(), names.end()};
}

std::string pretty_print(const Program& program) { return Printer(program).run(); }

std::string dump_ast_json(const Program& program, bool with_spans, int indent) {
  return Dumper(with_spans).program(program).dump(indent);
}

bool structurally_equal(const Program& a, const Program& b) {
  return dump_ast_json(a, false, -1) == dump_ast_json(b, false, -1);
}

}  // namespace emod
