#include <unordered_map>
#include <utility>

#include "checker.hpp"
#include "emod/error.hpp"
#include "emod/frontend.hpp"
#include "lexer.hpp"

namespace emod {

namespace {

using detail::Tok;
using detail::Token;

bool is_type_start(Tok t) {
  return t == Tok::KwInt || t == Tok::KwFloat || t == Tok::KwChar || t == Tok::KwBoolean ||
         t == Tok::KwObject || t == Tok::KwVoid;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program run() {
    ClassDecl main_class;
    main_class.name = kImplicitClass;
    main_class.implicit = true;
    prog_.classes.push_back(std::move(main_class));
    class_index_[kImplicitClass] = 0;

    while (!at(Tok::End)) {
      if (at(Tok::KwExtern)) {
        parse_extern();
      } else if (at(Tok::KwClass)) {
        parse_class();
      } else {
        parse_member(0);
      }
    }
    return std::move(prog_);
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& peek(std::size_t ahead) const {
    return toks_[std::min(i_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok t) const { return cur().kind == t; }

  const Token& take() {
    const Token& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    last_line_ = t.span.line;
    return t;
  }

  bool accept(Tok t) {
    if (!at(t)) return false;
    take();
    return true;
  }

  const Token& expect(Tok t, const char* context) {
    if (!at(t)) {
      throw SyntaxError(std::string("expected ") + detail::describe(t) + " " + context +
                            ", found " + detail::describe(cur().kind) +
                            (cur().text.empty() ? "" : " '" + cur().text + "'"),
                        cur().span.line, cur().span.col);
    }
    return take();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg, cur().span.line, cur().span.col);
  }

  Type parse_type(bool allow_void) {
    Type t;
    switch (cur().kind) {
      case Tok::KwInt: t = Type::Int(); break;
      case Tok::KwFloat: t = Type::Float(); break;
      case Tok::KwChar: t = Type::Char(); break;
      case Tok::KwBoolean: t = Type::Boolean(); break;
      case Tok::KwObject: t = Type::Object(); break;
      case Tok::KwVoid:
        if (!allow_void) fail("'void' is only allowed as a return type");
        t = Type::Void();
        break;
      default: fail("expected a type");
    }
    take();
    if (at(Tok::LBracket) && peek(1).kind == Tok::RBracket) {
      if (t.is_void()) fail("array of void");
      take();
      expect(Tok::RBracket, "in array type");
      t.array = true;
    }
    return t;
  }

  void parse_extern() {
    Span span = take().span;
    Extern ext;
    ext.span = span;
    ext.owner = expect(Tok::Ident, "after 'extern'").text;
    expect(Tok::Dot, "in extern name");
    ext.name = expect(Tok::Ident, "in extern name").text;
    expect(Tok::LParen, "in extern declaration");
    if (!at(Tok::RParen)) {
      do {
        ext.params.push_back(parse_type(false));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "in extern declaration");
    expect(Tok::Arrow, "before extern result type");
    ext.return_type = parse_type(true);
    expect(Tok::Semi, "after extern declaration");
    ext.index = static_cast<int>(prog_.externs.size());
    prog_.externs.push_back(std::move(ext));
  }

  void parse_class() {
    take();
    const Token& name = expect(Tok::Ident, "after 'class'");
    if (class_index_.count(name.text))
      throw ResolveError("duplicate class '" + name.text + "'", name.span.line, name.span.col);
    ClassDecl cls;
    cls.name = name.text;
    int idx = static_cast<int>(prog_.classes.size());
    class_index_[cls.name] = idx;
    prog_.classes.push_back(std::move(cls));
    expect(Tok::LBrace, "to open class body");
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) fail("unterminated class body");
      parse_member(idx);
    }
    take();
  }

  void parse_member(int class_idx) {
    Span span = cur().span;
    if (!is_type_start(cur().kind)) fail("expected a field or method declaration");
    Type type = parse_type(true);
    const Token& name = expect(Tok::Ident, "in member declaration");
    std::string owner = prog_.classes[class_idx].name;
    if (at(Tok::LParen)) {
      Method m;
      m.owner = owner;
      m.name = name.text;
      m.return_type = type;
      m.span = span;
      take();
      if (!at(Tok::RParen)) {
        do {
          Param p;
          p.type = parse_type(false);
          p.name = expect(Tok::Ident, "for parameter name").text;
          m.params.push_back(std::move(p));
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, "after parameters");
      if (!at(Tok::LBrace)) fail("expected '{' to open method body");
      m.body = parse_braced_list();
      m.index = static_cast<int>(prog_.methods.size());
      prog_.classes[class_idx].methods.push_back(m.index);
      prog_.methods.push_back(std::move(m));
      return;
    }
    if (type.is_void()) fail("field of type void");
    Field f;
    f.owner = owner;
    f.name = name.text;
    f.type = type;
    f.span = span;
    if (accept(Tok::Assign)) parse_field_init(f);
    expect(Tok::Semi, "after field declaration");
    f.index = static_cast<int>(prog_.fields.size());
    prog_.classes[class_idx].fields.push_back(f.index);
    prog_.fields.push_back(std::move(f));
  }

  void parse_field_init(Field& f) {
    bool negative = accept(Tok::Minus);
    const Token& t = cur();
    auto mismatch = [&] {
      throw TypeError("field initializer does not match type " + to_string(f.type), t.span.line,
                      t.span.col);
    };
    switch (t.kind) {
      case Tok::IntLit:
        if (!(f.type.is_int() || f.type.is_float())) mismatch();
        f.init_number = negative ? -static_cast<double>(t.int_value)
                                 : static_cast<double>(t.int_value);
        take();
        return;
      case Tok::FloatLit:
        if (!f.type.is_float()) mismatch();
        f.init_number = negative ? -t.float_value : t.float_value;
        take();
        return;
      case Tok::CharLit:
        if (negative || !f.type.is_char()) mismatch();
        f.init_number = static_cast<double>(t.int_value);
        take();
        return;
      case Tok::KwTrue:
      case Tok::KwFalse:
        if (negative || !f.type.is_boolean()) mismatch();
        f.init_bool = t.kind == Tok::KwTrue;
        take();
        return;
      case Tok::KwNull:
        if (negative || !f.type.is_reference()) mismatch();
        take();
        return;
      case Tok::KwNew: {
        if (negative) mismatch();
        take();
        Type elem = parse_type(false);
        if (elem.array || !f.type.array || f.type.element() != elem) mismatch();
        expect(Tok::LBracket, "in array allocation");
        const Token& n = expect(Tok::IntLit, "as field array length");
        f.init_array_length = static_cast<int>(n.int_value);
        expect(Tok::RBracket, "in array allocation");
        return;
      }
      default:
        fail("field initializers must be literals or 'new T[n]'");
    }
  }

  std::unique_ptr<StmtList> parse_braced_list() {
    auto list = std::make_unique<StmtList>();
    list->span = expect(Tok::LBrace, "to open block").span;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) fail("unterminated block");
      if (!list->stmts.empty() && list->stmts.back()->kind == StmtKind::Return)
        fail("unreachable statement after return");
      list->stmts.push_back(parse_stmt());
    }
    take();
    return list;
  }

  std::unique_ptr<StmtList> parse_body() {
    if (at(Tok::LBrace)) return parse_braced_list();
    auto list = std::make_unique<StmtList>();
    list->span = cur().span;
    list->stmts.push_back(parse_stmt());
    return list;
  }

  StmtPtr make_stmt(StmtKind kind, Span span) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->span = span;
    return s;
  }

  StmtPtr parse_stmt() {
    Span span = cur().span;
    StmtPtr s;
    switch (cur().kind) {
      case Tok::LBrace: fail("nested blocks are not supported; use a control statement body");
      case Tok::KwIf: s = parse_if(); break;
      case Tok::KwFor: s = parse_for(); break;
      case Tok::KwWhile: s = parse_while(); break;
      case Tok::KwSwitch: s = parse_switch(); break;
      case Tok::KwReturn: {
        take();
        s = make_stmt(StmtKind::Return, span);
        if (!at(Tok::Semi)) s->expr = parse_expr();
        expect(Tok::Semi, "after return");
        break;
      }
      default:
        if (is_type_start(cur().kind)) {
          s = parse_decl();
        } else {
          s = parse_simple();
        }
        expect(Tok::Semi, "after statement");
        break;
    }
    s->span = span;
    s->end_line = last_line_;
    return s;
  }

  StmtPtr parse_decl() {
    Span span = cur().span;
    auto s = make_stmt(StmtKind::VarDecl, span);
    s->decl_type = parse_type(false);
    s->name = expect(Tok::Ident, "for variable name").text;
    if (accept(Tok::Assign)) s->expr = parse_expr();
    s->end_line = last_line_;
    return s;
  }

  // Assignment, compound assignment, increment/decrement or call.
  StmtPtr parse_simple() {
    Span span = cur().span;
    ExprPtr e = parse_expr();
    AssignOp op;
    switch (cur().kind) {
      case Tok::Assign: op = AssignOp::Set; break;
      case Tok::PlusAssign: op = AssignOp::Add; break;
      case Tok::MinusAssign: op = AssignOp::Sub; break;
      case Tok::StarAssign: op = AssignOp::Mul; break;
      case Tok::SlashAssign: op = AssignOp::Div; break;
      default: {
        if (e->kind != ExprKind::Call && e->kind != ExprKind::LibCall &&
            e->kind != ExprKind::IncDec && e->kind != ExprKind::Field)
          throw SyntaxError("expression is not a statement", span.line, span.col);
        // A bare qualified name followed by ';' cannot be a call; reject like Java.
        if (e->kind == ExprKind::Field)
          throw SyntaxError("expression is not a statement", span.line, span.col);
        auto s = make_stmt(StmtKind::ExprStmt, span);
        s->expr = std::move(e);
        s->end_line = last_line_;
        return s;
      }
    }
    take();
    if (e->kind != ExprKind::Var && e->kind != ExprKind::Field && e->kind != ExprKind::Index)
      throw SyntaxError("left side of assignment is not assignable", span.line, span.col);
    auto s = make_stmt(StmtKind::Assign, span);
    s->target = std::move(e);
    s->assign_op = op;
    s->expr = parse_expr();
    s->end_line = last_line_;
    return s;
  }

  StmtPtr parse_if() {
    Span span = take().span;
    auto s = make_stmt(StmtKind::If, span);
    expect(Tok::LParen, "after 'if'");
    s->expr = parse_expr();
    expect(Tok::RParen, "after if condition");
    s->body = parse_body();
    if (accept(Tok::KwElse)) s->else_body = parse_body();
    return s;
  }

  StmtPtr parse_for() {
    Span span = take().span;
    auto s = make_stmt(StmtKind::For, span);
    expect(Tok::LParen, "after 'for'");
    if (!at(Tok::Semi)) {
      Span is = cur().span;
      s->init = is_type_start(cur().kind) ? parse_decl() : parse_simple();
      s->init->span = is;
    }
    expect(Tok::Semi, "after for initializer");
    if (at(Tok::Semi)) fail("for loop requires a condition");
    s->expr = parse_expr();
    expect(Tok::Semi, "after for condition");
    if (!at(Tok::RParen)) {
      Span us = cur().span;
      s->update = parse_simple();
      s->update->span = us;
    }
    expect(Tok::RParen, "after for header");
    s->body = parse_body();
    return s;
  }

  StmtPtr parse_while() {
    Span span = take().span;
    auto s = make_stmt(StmtKind::While, span);
    expect(Tok::LParen, "after 'while'");
    s->expr = parse_expr();
    expect(Tok::RParen, "after while condition");
    s->body = parse_body();
    return s;
  }

  StmtPtr parse_switch() {
    Span span = take().span;
    auto s = make_stmt(StmtKind::Switch, span);
    expect(Tok::LParen, "after 'switch'");
    s->expr = parse_expr();
    expect(Tok::RParen, "after switch scrutinee");
    expect(Tok::LBrace, "to open switch body");
    while (!at(Tok::RBrace)) {
      if (at(Tok::KwCase)) {
        take();
        SwitchCase c;
        c.label = parse_case_label();
        expect(Tok::Colon, "after case label");
        c.body.span = cur().span;
        parse_case_body(c.body);
        s->cases.push_back(std::move(c));
      } else if (at(Tok::KwDefault)) {
        if (s->else_body) fail("duplicate default label");
        take();
        expect(Tok::Colon, "after 'default'");
        s->else_body = std::make_unique<StmtList>();
        s->else_body->span = cur().span;
        parse_case_body(*s->else_body);
      } else {
        fail("expected 'case' or 'default' in switch");
      }
    }
    take();
    return s;
  }

  ExprPtr parse_case_label() {
    Span span = cur().span;
    bool negative = accept(Tok::Minus);
    auto e = std::make_unique<Expr>();
    e->span = span;
    if (at(Tok::IntLit)) {
      e->kind = ExprKind::IntLit;
      e->int_value = negative ? -take().int_value : take().int_value;
    } else if (at(Tok::CharLit) && !negative) {
      e->kind = ExprKind::CharLit;
      e->int_value = take().int_value;
    } else {
      fail("case labels must be int or char literals");
    }
    return e;
  }

  void parse_case_body(StmtList& body) {
    while (!at(Tok::KwCase) && !at(Tok::KwDefault) && !at(Tok::RBrace)) {
      if (at(Tok::End)) fail("unterminated switch");
      if (!body.stmts.empty() && body.stmts.back()->kind == StmtKind::Return)
        fail("unreachable statement after return");
      body.stmts.push_back(parse_stmt());
    }
  }

  // ---- expressions -------------------------------------------------------------

  ExprPtr make(ExprKind k, Span span) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->span = span;
    return e;
  }

  ExprPtr parse_expr() { return parse_binary(0); }

  struct BinInfo {
    int prec;
    BinaryOp op;
  };

  static bool binary_info(Tok t, BinInfo& out) {
    switch (t) {
      case Tok::OrOr: out = {1, BinaryOp::Or}; return true;
      case Tok::AndAnd: out = {2, BinaryOp::And}; return true;
      case Tok::Pipe: out = {3, BinaryOp::BitOr}; return true;
      case Tok::Amp: out = {4, BinaryOp::BitAnd}; return true;
      case Tok::EqEq: out = {5, BinaryOp::Eq}; return true;
      case Tok::NotEq: out = {5, BinaryOp::NotEq}; return true;
      case Tok::Less: out = {6, BinaryOp::Less}; return true;
      case Tok::Greater: out = {6, BinaryOp::Greater}; return true;
      case Tok::LessEq: out = {6, BinaryOp::LessEq}; return true;
      case Tok::GreaterEq: out = {6, BinaryOp::GreaterEq}; return true;
      case Tok::Shl: out = {7, BinaryOp::Shl}; return true;
      case Tok::Shr: out = {7, BinaryOp::Shr}; return true;
      case Tok::Plus: out = {8, BinaryOp::Add}; return true;
      case Tok::Minus: out = {8, BinaryOp::Sub}; return true;
      case Tok::Star: out = {9, BinaryOp::Mul}; return true;
      case Tok::Slash: out = {9, BinaryOp::Div}; return true;
      case Tok::Percent: out = {9, BinaryOp::Rem}; return true;
      default: return false;
    }
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    BinInfo info{};
    while (binary_info(cur().kind, info) && info.prec > min_prec) {
      Span span = take().span;
      ExprPtr rhs = parse_binary(info.prec);
      auto e = make(ExprKind::Binary, span);
      e->binary_op = info.op;
      e->kids.push_back(std::move(lhs));
      e->kids.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    Span span = cur().span;
    switch (cur().kind) {
      case Tok::Minus: {
        take();
        // Negative numeric literals are folded rather than counted as a negation.
        if (at(Tok::IntLit) || at(Tok::FloatLit)) {
          ExprPtr lit = parse_postfix();
          lit->span = span;
          lit->int_value = -lit->int_value;
          lit->float_value = -lit->float_value;
          return lit;
        }
        auto e = make(ExprKind::Unary, span);
        e->unary_op = UnaryOp::Neg;
        e->kids.push_back(parse_unary());
        return e;
      }
      case Tok::Bang: {
        take();
        auto e = make(ExprKind::Unary, span);
        e->unary_op = UnaryOp::Not;
        e->kids.push_back(parse_unary());
        return e;
      }
      case Tok::PlusPlus:
      case Tok::MinusMinus: {
        bool inc = take().kind == Tok::PlusPlus;
        auto e = make(ExprKind::IncDec, span);
        e->increment = inc;
        e->prefix = true;
        e->kids.push_back(parse_unary());
        return e;
      }
      case Tok::LParen:
        if (is_type_start(peek(1).kind) && peek(1).kind != Tok::KwVoid &&
            peek(2).kind == Tok::RParen) {
          take();
          auto e = make(ExprKind::Cast, span);
          e->type = parse_type(false);
          if (e->type.array) fail("casts to array types are not supported");
          expect(Tok::RParen, "after cast type");
          e->kids.push_back(parse_unary());
          return e;
        }
        return parse_postfix();
      default:
        return parse_postfix();
    }
  }

  std::vector<ExprPtr> parse_args() {
    std::vector<ExprPtr> args;
    expect(Tok::LParen, "to open argument list");
    if (!at(Tok::RParen)) {
      do {
        args.push_back(parse_expr());
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "to close argument list");
    return args;
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    for (;;) {
      Span span = cur().span;
      if (at(Tok::LBracket)) {
        take();
        auto idx = make(ExprKind::Index, span);
        idx->kids.push_back(std::move(e));
        idx->kids.push_back(parse_expr());
        expect(Tok::RBracket, "after index");
        e = std::move(idx);
      } else if (at(Tok::PlusPlus) || at(Tok::MinusMinus)) {
        bool inc = take().kind == Tok::PlusPlus;
        auto p = make(ExprKind::IncDec, span);
        p->increment = inc;
        p->prefix = false;
        p->kids.push_back(std::move(e));
        e = std::move(p);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_primary() {
    const Token& t = cur();
    Span span = t.span;
    switch (t.kind) {
      case Tok::IntLit: {
        auto e = make(ExprKind::IntLit, span);
        e->int_value = take().int_value;
        e->float_value = static_cast<double>(e->int_value);
        return e;
      }
      case Tok::FloatLit: {
        auto e = make(ExprKind::FloatLit, span);
        e->float_value = take().float_value;
        return e;
      }
      case Tok::CharLit: {
        auto e = make(ExprKind::CharLit, span);
        e->int_value = take().int_value;
        return e;
      }
      case Tok::KwTrue:
      case Tok::KwFalse: {
        auto e = make(ExprKind::BoolLit, span);
        e->bool_value = take().kind == Tok::KwTrue;
        return e;
      }
      case Tok::KwNull: {
        take();
        return make(ExprKind::NullLit, span);
      }
      case Tok::LParen: {
        take();
        ExprPtr e = parse_expr();
        expect(Tok::RParen, "to close parenthesis");
        return e;
      }
      case Tok::KwNew: {
        take();
        auto e = make(ExprKind::NewArray, span);
        Type elem = parse_type(false);
        if (elem.array) fail("multi-dimensional arrays are not supported");
        e->type = Type(elem.base, true);
        expect(Tok::LBracket, "in array allocation");
        e->kids.push_back(parse_expr());
        expect(Tok::RBracket, "in array allocation");
        return e;
      }
      case Tok::Ident: {
        std::string name = take().text;
        if (at(Tok::LParen)) {
          auto e = make(ExprKind::Call, span);
          e->name = std::move(name);
          e->kids = parse_args();
          return e;
        }
        if (at(Tok::Dot)) {
          take();
          std::string member = expect(Tok::Ident, "after '.'").text;
          if (at(Tok::LParen)) {
            // Resolved to Call or LibCall by the checker.
            auto e = make(ExprKind::Call, span);
            e->qualifier = std::move(name);
            e->name = std::move(member);
            e->kids = parse_args();
            return e;
          }
          auto e = make(ExprKind::Field, span);
          e->qualifier = std::move(name);
          e->name = std::move(member);
          return e;
        }
        auto e = make(ExprKind::Var, span);
        e->name = std::move(name);
        return e;
      }
      default:
        fail(std::string("expected an expression, found ") + detail::describe(t.kind));
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  int last_line_ = 1;
  Program prog_;
  std::unordered_map<std::string, int> class_index_;
};

}  // namespace

Program parse(std::string_view source) {
  Program prog = Parser(detail::lex(source)).run();
  detail::check(prog);
  return prog;
}

}  // namespace emod
