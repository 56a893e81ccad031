#pragma once
// Recursive-descent parser for the expression DSL.
//
// Grammar (standard precedence, ^ binds tightest and is right-associative):
//   expression := term (('+'|'-') term)*
//   term       := factor (('*'|'/') factor)*
//   factor     := ('-'|'+') factor | power
//   power      := primary ('^' factor)?
//   primary    := integer | ident | ident '(' args ')' | '(' expression ')'
//              | 'sqrt' '(' expression ')'
//              | 'D' '[' int (',' int)* ']' ident '(' args ')'
// Exponents must evaluate to exact rational constants. Unknown identifiers are
// interned as parameter symbols; identifiers followed by '(' are opaque calls.

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bouton/expr.hpp"

namespace bouton {

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " (at offset " + std::to_string(pos) + ")"), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw parse_error(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  Expr expression() {
    Expr e = term();
    while (true) {
      if (eat('+')) e = e + term();
      else if (eat('-')) e = e - term();
      else return e;
    }
  }

  Expr term() {
    Expr e = factor();
    while (true) {
      if (eat('*')) e = e * factor();
      else if (eat('/')) e = e / factor();
      else return e;
    }
  }

  Expr factor() {
    if (eat('-')) return -factor();
    if (eat('+')) return factor();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (eat('^')) {
      std::size_t at = pos_;
      Expr e = factor();  // right-associative; allows -2 and (1/2)
      if (e->kind != Kind::Number)
        throw parse_error("exponent must be an exact rational constant", at);
      return pow_e(base, e->value);
    }
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return integer();
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == '.') fail("decimal literals are not supported; use exact ratios like 1/2");
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '@') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr integer() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.')
      fail("decimal literals are not supported; use exact ratios like 1/2");
    try {
      return num(Rational::from_string(src_.substr(start, pos_ - start)));
    } catch (const overflow_error&) {
      throw parse_error("integer literal too large", start);
    }
  }

  std::string ident_text() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < src_.size() && src_[pos_] == '@') ++pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("expected identifier");
    return std::string(src_.substr(start, pos_ - start));
  }

  Expr identifier() {
    std::size_t start = pos_;
    std::string name = ident_text();
    if (name == "sqrt") {
      if (!eat('(')) throw parse_error("sqrt requires parentheses", pos_);
      Expr e = expression();
      if (!eat(')')) fail("expected ')'");
      return sqrt_e(e);
    }
    if (name == "D" && peek() == '[') {
      eat('[');
      std::vector<int> slots;
      do {
        skip_ws();
        std::size_t ds = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == ds) fail("expected derivative slot index");
        slots.push_back(std::stoi(std::string(src_.substr(ds, pos_ - ds))));
      } while (eat(','));
      if (!eat(']')) fail("expected ']'");
      std::string fname = ident_text();
      if (!eat('(')) fail("derivative call requires an argument list");
      auto args = arg_list();
      std::vector<int> counts(args.size(), 0);
      for (int s : slots) {
        if (s < 1 || static_cast<std::size_t>(s) > args.size())
          throw parse_error("derivative slot out of range", start);
        counts[static_cast<std::size_t>(s) - 1]++;
      }
      return dcall(fname, counts, std::move(args));
    }
    if (peek() == '(') {
      eat('(');
      auto args = arg_list();
      return call(name, std::move(args));
    }
    return symbol(intern_symbol(name));
  }

  // Parses "expr, expr, ...)" including the closing parenthesis.
  std::vector<Expr> arg_list() {
    std::vector<Expr> args;
    if (eat(')')) return args;
    do {
      args.push_back(expression());
    } while (eat(','));
    if (!eat(')')) fail("expected ')' after arguments");
    return args;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(std::string_view src) { return detail::Parser(src).parse(); }

}  // namespace bouton
