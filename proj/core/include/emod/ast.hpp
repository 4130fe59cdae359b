#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emod/types.hpp"

namespace emod {

struct Span {
  int line = 0;
  int col = 0;
};

enum class ExprKind : std::uint8_t {
  IntLit,
  FloatLit,
  CharLit,
  BoolLit,
  NullLit,
  Var,       // local variable or parameter
  Field,     // class field, bare or qualified
  Index,     // a[i]
  Length,    // a.length
  Unary,     // -e, !e
  Binary,
  Cast,      // (T) e
  Call,      // user method call
  LibCall,   // call of an extern-declared library function
  NewArray,  // new T[n]
  IncDec,    // ++x, x++, --x, x--
};

enum class UnaryOp : std::uint8_t { Neg, Not };

enum class BinaryOp : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  Rem,
  Less,
  Greater,
  LessEq,
  GreaterEq,
  Eq,
  NotEq,
  And,
  Or,
  BitAnd,
  BitOr,
  Shl,
  Shr,
};

const char* spelling(BinaryOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  Span span;
  int id = -1;  // dense within a Program
  Type type;    // resolved static type

  // Literals.
  std::int64_t int_value = 0;
  double float_value = 0.0;
  bool bool_value = false;

  // Names as written. For Field/Call/LibCall `qualifier` holds the class part when present.
  std::string name;
  std::string qualifier;

  UnaryOp unary_op = UnaryOp::Neg;
  BinaryOp binary_op = BinaryOp::Add;
  bool increment = true;  // IncDec: ++ or --
  bool prefix = false;    // IncDec: ++x vs x++

  // Binary: operand static types. Cast: source type in lhs_type.
  Type lhs_type;
  Type rhs_type;

  // Resolution: local slot (Var), global field index (Field), method index (Call),
  // extern index (LibCall).
  int target = -1;

  // Operands: Unary/Cast/Length/NewArray/IncDec use kids[0]; Binary/Index use kids[0..1];
  // Call/LibCall use kids as arguments.
  std::vector<ExprPtr> kids;
};

enum class StmtKind : std::uint8_t { VarDecl, Assign, ExprStmt, If, For, While, Switch, Return };

enum class AssignOp : std::uint8_t { Set, Add, Sub, Mul, Div };

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct StmtList {
  int id = -1;  // dense within a Program
  Span span;    // position of the opening brace or the single statement
  std::vector<StmtPtr> stmts;
};

struct SwitchCase {
  ExprPtr label;  // int or char literal
  StmtList body;
};

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  Span span;
  int end_line = 0;
  int id = -1;  // dense within a Program

  // VarDecl
  Type decl_type;
  std::string name;
  int slot = -1;

  // VarDecl init, Assign value, ExprStmt expression, Return value (nullable), conditions,
  // switch scrutinee.
  ExprPtr expr;

  // Assign
  ExprPtr target;
  AssignOp assign_op = AssignOp::Set;
  Type op_result;  // compound assignment: result type of the arithmetic part

  // For
  StmtPtr init;    // nullable
  StmtPtr update;  // nullable

  // If/For/While body; switch default (may be absent)
  std::unique_ptr<StmtList> body;
  std::unique_ptr<StmtList> else_body;

  std::vector<SwitchCase> cases;
};

struct Param {
  std::string name;
  Type type;
  int slot = -1;
};

struct Method {
  int index = -1;
  std::string owner;  // class name
  std::string name;
  Type return_type;
  std::vector<Param> params;
  std::unique_ptr<StmtList> body;
  int num_slots = 0;
  Span span;

  std::string qualified_name() const { return owner + "." + name; }
};

struct Field {
  int index = -1;
  std::string owner;
  std::string name;
  Type type;
  // Initial value: literal, or array length for `new T[n]`.
  std::optional<double> init_number;
  bool init_bool = false;
  std::optional<int> init_array_length;
  Span span;
};

struct Extern {
  int index = -1;
  std::string owner;
  std::string name;
  std::vector<Type> params;
  Type return_type;
  Span span;

  std::string qualified_name() const { return owner + "." + name; }
};

struct ClassDecl {
  std::string name;
  bool implicit = false;
  std::vector<int> fields;   // indices into Program::fields
  std::vector<int> methods;  // indices into Program::methods
};

/// A parsed, name-resolved and type-annotated MiniJ program.
/// Nodes are heap-allocated, so pointers into a Program stay valid when it is moved.
struct Program {
  std::vector<ClassDecl> classes;
  std::vector<Method> methods;
  std::vector<Field> fields;
  std::vector<Extern> externs;

  int num_exprs = 0;
  int num_stmts = 0;
  int num_lists = 0;

  // Lookup tables indexed by node id.
  std::vector<const Stmt*> stmt_by_id;
  std::vector<const StmtList*> list_by_id;
  std::vector<int> stmt_method;  // owning method index per statement id

  const Method* find_method(const std::string& owner, const std::string& name) const;
  const Extern* find_extern(const std::string& owner, const std::string& name) const;
};

/// Name of the class that collects top-level members of a file.
inline constexpr const char* kImplicitClass = "Main";

}  // namespace emod
