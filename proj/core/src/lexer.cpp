#include "lexer.hpp"

#include <cctype>
#include <charconv>
#include <unordered_map>

#include "emod/error.hpp"

namespace emod::detail {

namespace {

const std::unordered_map<std::string_view, Tok>& keywords() {
  static const std::unordered_map<std::string_view, Tok> kw = {
      {"int", Tok::KwInt},         {"float", Tok::KwFloat},     {"char", Tok::KwChar},
      {"boolean", Tok::KwBoolean}, {"Object", Tok::KwObject},   {"void", Tok::KwVoid},
      {"class", Tok::KwClass},     {"extern", Tok::KwExtern},   {"if", Tok::KwIf},
      {"else", Tok::KwElse},       {"for", Tok::KwFor},         {"while", Tok::KwWhile},
      {"switch", Tok::KwSwitch},   {"case", Tok::KwCase},       {"default", Tok::KwDefault},
      {"return", Tok::KwReturn},   {"new", Tok::KwNew},         {"true", Tok::KwTrue},
      {"false", Tok::KwFalse},     {"null", Tok::KwNull},
  };
  return kw;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.span = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(std::move(t));
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        lex_word(t);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (c == '\'') {
        lex_char(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        int l = line_, cl = col_;
        advance();
        advance();
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) advance();
        if (pos_ >= src_.size()) throw SyntaxError("unterminated comment", l, cl);
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  void lex_word(Token& t) {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      advance();
    t.text = std::string(src_.substr(start, pos_ - start));
    auto it = keywords().find(t.text);
    t.kind = it == keywords().end() ? Tok::Ident : it->second;
  }

  void lex_number(Token& t) {
    std::size_t start = pos_;
    bool is_float = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      is_float = true;
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save_pos = pos_;
      int save_line = line_, save_col = col_;
      advance();
      if (peek() == '+' || peek() == '-') advance();
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        is_float = true;
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      } else {
        pos_ = save_pos;
        line_ = save_line;
        col_ = save_col;
      }
    }
    std::string_view digits = src_.substr(start, pos_ - start);
    t.text = std::string(digits);
    if (peek() == 'f' || peek() == 'F') {
      is_float = true;
      advance();
    }
    if (is_float) {
      t.kind = Tok::FloatLit;
      t.float_value = std::stod(t.text);
    } else {
      t.kind = Tok::IntLit;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), t.int_value);
      if (ec != std::errc() || t.int_value > 2147483648LL)
        throw SyntaxError("integer literal out of range: " + t.text, t.span.line, t.span.col);
    }
  }

  void lex_char(Token& t) {
    advance();  // opening quote
    char value = peek();
    if (value == '\\') {
      advance();
      switch (peek()) {
        case 'n': value = '\n'; break;
        case 't': value = '\t'; break;
        case '0': value = '\0'; break;
        case '\\': value = '\\'; break;
        case '\'': value = '\''; break;
        default: throw SyntaxError("bad escape in char literal", line_, col_);
      }
    } else if (value == '\'' || value == '\0') {
      throw SyntaxError("empty char literal", t.span.line, t.span.col);
    }
    advance();
    if (peek() != '\'') throw SyntaxError("unterminated char literal", t.span.line, t.span.col);
    advance();
    t.kind = Tok::CharLit;
    t.int_value = static_cast<unsigned char>(value);
    t.text = std::string(1, value);
  }

  void lex_punct(Token& t) {
    char c = peek();
    char n = peek(1);
    auto two = [&](Tok k) {
      t.kind = k;
      t.text = std::string{c, n};
      advance();
      advance();
    };
    auto one = [&](Tok k) {
      t.kind = k;
      t.text = std::string{c};
      advance();
    };
    switch (c) {
      case '{': return one(Tok::LBrace);
      case '}': return one(Tok::RBrace);
      case '(': return one(Tok::LParen);
      case ')': return one(Tok::RParen);
      case '[': return one(Tok::LBracket);
      case ']': return one(Tok::RBracket);
      case ';': return one(Tok::Semi);
      case ',': return one(Tok::Comma);
      case '.': return one(Tok::Dot);
      case ':': return one(Tok::Colon);
      case '+':
        if (n == '+') return two(Tok::PlusPlus);
        if (n == '=') return two(Tok::PlusAssign);
        return one(Tok::Plus);
      case '-':
        if (n == '-') return two(Tok::MinusMinus);
        if (n == '=') return two(Tok::MinusAssign);
        if (n == '>') return two(Tok::Arrow);
        return one(Tok::Minus);
      case '*':
        if (n == '=') return two(Tok::StarAssign);
        return one(Tok::Star);
      case '/':
        if (n == '=') return two(Tok::SlashAssign);
        return one(Tok::Slash);
      case '%': return one(Tok::Percent);
      case '!':
        if (n == '=') return two(Tok::NotEq);
        return one(Tok::Bang);
      case '&':
        if (n == '&') return two(Tok::AndAnd);
        return one(Tok::Amp);
      case '|':
        if (n == '|') return two(Tok::OrOr);
        return one(Tok::Pipe);
      case '<':
        if (n == '<') return two(Tok::Shl);
        if (n == '=') return two(Tok::LessEq);
        return one(Tok::Less);
      case '>':
        if (n == '>') return two(Tok::Shr);
        if (n == '=') return two(Tok::GreaterEq);
        return one(Tok::Greater);
      case '=':
        if (n == '=') return two(Tok::EqEq);
        return one(Tok::Assign);
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'", line_, col_);
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<Token> lex(std::string_view source) { return Lexer(source).run(); }

const char* describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::IntLit: return "integer literal";
    case Tok::FloatLit: return "float literal";
    case Tok::CharLit: return "char literal";
    case Tok::KwInt: return "'int'";
    case Tok::KwFloat: return "'float'";
    case Tok::KwChar: return "'char'";
    case Tok::KwBoolean: return "'boolean'";
    case Tok::KwObject: return "'Object'";
    case Tok::KwVoid: return "'void'";
    case Tok::KwClass: return "'class'";
    case Tok::KwExtern: return "'extern'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwFor: return "'for'";
    case Tok::KwWhile: return "'while'";
    case Tok::KwSwitch: return "'switch'";
    case Tok::KwCase: return "'case'";
    case Tok::KwDefault: return "'default'";
    case Tok::KwReturn: return "'return'";
    case Tok::KwNew: return "'new'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwNull: return "'null'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::Arrow: return "'->'";
    case Tok::Assign: return "'='";
    case Tok::PlusAssign: return "'+='";
    case Tok::MinusAssign: return "'-='";
    case Tok::StarAssign: return "'*='";
    case Tok::SlashAssign: return "'/='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::PlusPlus: return "'++'";
    case Tok::MinusMinus: return "'--'";
    case Tok::Bang: return "'!'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Amp: return "'&'";
    case Tok::Pipe: return "'|'";
    case Tok::Shl: return "'<<'";
    case Tok::Shr: return "'>>'";
    case Tok::Less: return "'<'";
    case Tok::Greater: return "'>'";
    case Tok::LessEq: return "'<='";
    case Tok::GreaterEq: return "'>='";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
  }
  return "token";
}

}  // namespace emod::detail
