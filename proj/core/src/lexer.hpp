#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "emod/ast.hpp"

namespace emod::detail {

enum class Tok {
  End,
  Ident,
  IntLit,
  FloatLit,
  CharLit,
  // keywords
  KwInt,
  KwFloat,
  KwChar,
  KwBoolean,
  KwObject,
  KwVoid,
  KwClass,
  KwExtern,
  KwIf,
  KwElse,
  KwFor,
  KwWhile,
  KwSwitch,
  KwCase,
  KwDefault,
  KwReturn,
  KwNew,
  KwTrue,
  KwFalse,
  KwNull,
  // punctuation
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Semi,
  Comma,
  Dot,
  Colon,
  Arrow,
  Assign,
  PlusAssign,
  MinusAssign,
  StarAssign,
  SlashAssign,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  PlusPlus,
  MinusMinus,
  Bang,
  AndAnd,
  OrOr,
  Amp,
  Pipe,
  Shl,
  Shr,
  Less,
  Greater,
  LessEq,
  GreaterEq,
  EqEq,
  NotEq,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Span span;
  std::int64_t int_value = 0;
  double float_value = 0.0;
};

std::vector<Token> lex(std::string_view source);

const char* describe(Tok t);

}  // namespace emod::detail
