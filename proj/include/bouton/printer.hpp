#pragma once
// Plain-text rendering of expressions. The output re-parses (parser.hpp) to a
// structurally identical expression: parse(print(e)) == e for normalized e.
// Exponent 1/2 renders as sqrt(...), negative exponents as division.

#include <string>
#include <vector>

#include "bouton/expr.hpp"

namespace bouton {

std::string to_string(const Expr& e);

namespace detail {

inline bool needs_parens_as_base(const Expr& b) {
  switch (b->kind) {
    case Kind::Sum:
    case Kind::Product:
    case Kind::Power: return true;
    case Kind::Number: return b->value.is_negative() || !b->value.is_integer();
    default: return false;
  }
}

inline std::string print_power_positive(const Expr& base, const Rational& expo) {
  // expo is positive and != 1 here.
  if (expo == Rational(1, 2)) return "sqrt(" + to_string(base) + ")";
  std::string bs = to_string(base);
  if (needs_parens_as_base(base)) bs = "(" + bs + ")";
  if (expo.is_integer()) return bs + "^" + expo.str();
  return bs + "^(" + expo.str() + ")";
}

inline std::string print_factor(const Expr& f) {
  // A factor inside a product's numerator or denominator (positive exponents).
  if (f->kind == Kind::Sum) return "(" + to_string(f) + ")";
  return to_string(f);
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  switch (e->kind) {
    case Kind::Number: return e->value.str();
    case Kind::Symbol: return symbol_name(e->sym);
    case Kind::Power: {
      if (e->expo.sign() < 0) {
        Expr flipped = pow_e(e->children[0], -e->expo);
        std::string ds = detail::print_factor(flipped);
        if (flipped->kind == Kind::Product) ds = "(" + ds + ")";
        return "1/" + ds;
      }
      return detail::print_power_positive(e->children[0], e->expo);
    }
    case Kind::Product: {
      Rational coeff(1);
      std::vector<Expr> numf, denf;
      for (const auto& c : e->children) {
        if (c->kind == Kind::Number) {
          coeff = c->value;
        } else if (c->kind == Kind::Power && c->expo.sign() < 0) {
          denf.push_back(pow_e(c->children[0], -c->expo));
        } else {
          numf.push_back(c);
        }
      }
      std::string out;
      bool neg = coeff.is_negative();
      Rational cabs = coeff.abs();
      bool wrote = false;
      if (!cabs.is_one() || numf.empty()) {
        out += cabs.str();
        wrote = true;
      }
      for (const auto& f : numf) {
        if (wrote) out += "*";
        out += detail::print_factor(f);
        wrote = true;
      }
      if (!denf.empty()) {
        out += "/";
        if (denf.size() == 1) {
          std::string ds = detail::print_factor(denf[0]);
          if (denf[0]->kind == Kind::Product) ds = "(" + ds + ")";
          out += ds;
        } else {
          out += "(";
          for (std::size_t i = 0; i < denf.size(); ++i) {
            if (i) out += "*";
            out += detail::print_factor(denf[i]);
          }
          out += ")";
        }
      }
      return neg ? "-" + out : out;
    }
    case Kind::Sum: {
      std::string out;
      bool first = true;
      for (const auto& term : e->children) {
        auto [c, monic] = detail::split_coeff(term);
        if (first) {
          out += to_string(term);
          first = false;
          continue;
        }
        if (c.is_negative()) {
          Expr flipped = detail::with_coeff(-c, monic);
          std::string ts = to_string(flipped);
          if (flipped->kind == Kind::Sum) ts = "(" + ts + ")";
          out += " - " + ts;
        } else {
          out += " + " + to_string(term);
        }
      }
      return out;
    }
    case Kind::Call: {
      std::string out;
      bool any_d = false;
      for (int d : e->dorders)
        if (d > 0) any_d = true;
      if (any_d) {
        out += "D[";
        bool firstslot = true;
        for (std::size_t i = 0; i < e->dorders.size(); ++i) {
          for (int r = 0; r < e->dorders[i]; ++r) {
            if (!firstslot) out += ",";
            out += std::to_string(i + 1);
            firstslot = false;
          }
        }
        out += "]";
      }
      out += e->call_name + "(";
      for (std::size_t i = 0; i < e->children.size(); ++i) {
        if (i) out += ", ";
        out += to_string(e->children[i]);
      }
      out += ")";
      return out;
    }
  }
  return "<invalid>";
}

}  // namespace bouton
