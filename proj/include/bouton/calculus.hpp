#pragma once
// Exact differentiation and substitution on normalized expressions.
//
// Opaque calls differentiate via the chain rule into derivative calls
// (dorders bookkeeping); substitute_calls expands calls whose definitions are
// known, applying any accumulated derivative orders to the definition body.

#include <map>
#include <string>
#include <vector>

#include "bouton/expr.hpp"

namespace bouton {

inline Expr differentiate(const Expr& e, SymbolId var) {
  switch (e->kind) {
    case Kind::Number: return expr_zero();
    case Kind::Symbol: return e->sym == var ? expr_one() : expr_zero();
    case Kind::Sum: {
      std::vector<Expr> terms;
      terms.reserve(e->children.size());
      for (const auto& c : e->children) terms.push_back(differentiate(c, var));
      return add(std::move(terms));
    }
    case Kind::Product: {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < e->children.size(); ++i) {
        Expr di = differentiate(e->children[i], var);
        if (is_zero_literal(di)) continue;
        std::vector<Expr> fs;
        fs.reserve(e->children.size());
        for (std::size_t j = 0; j < e->children.size(); ++j)
          if (j != i) fs.push_back(e->children[j]);
        fs.push_back(di);
        terms.push_back(mul(std::move(fs)));
      }
      return add(std::move(terms));
    }
    case Kind::Power: {
      Expr db = differentiate(e->children[0], var);
      if (is_zero_literal(db)) return expr_zero();
      return mul({num(e->expo), pow_e(e->children[0], e->expo - Rational(1)), db});
    }
    case Kind::Call: {
      std::vector<Expr> terms;
      for (std::size_t j = 0; j < e->children.size(); ++j) {
        Expr dj = differentiate(e->children[j], var);
        if (is_zero_literal(dj)) continue;
        std::vector<int> d = e->dorders;
        d[j] += 1;
        terms.push_back(mul({dcall(e->call_name, std::move(d), e->children), dj}));
      }
      return add(std::move(terms));
    }
  }
  return expr_zero();
}

inline Expr differentiate(const Expr& e, SymbolId var, int times) {
  Expr r = e;
  for (int i = 0; i < times; ++i) r = differentiate(r, var);
  return r;
}

// Simultaneous substitution of symbols. Results are renormalized bottom-up,
// so e.g. t -> 0 propagates through powers (0^negative throws expr_error).
inline Expr substitute(const Expr& e, const std::map<SymbolId, Expr>& repl) {
  switch (e->kind) {
    case Kind::Number: return e;
    case Kind::Symbol: {
      auto it = repl.find(e->sym);
      return it == repl.end() ? e : it->second;
    }
    case Kind::Sum: {
      std::vector<Expr> xs;
      xs.reserve(e->children.size());
      for (const auto& c : e->children) xs.push_back(substitute(c, repl));
      return add(std::move(xs));
    }
    case Kind::Product: {
      std::vector<Expr> xs;
      xs.reserve(e->children.size());
      for (const auto& c : e->children) xs.push_back(substitute(c, repl));
      return mul(std::move(xs));
    }
    case Kind::Power: return pow_e(substitute(e->children[0], repl), e->expo);
    case Kind::Call: {
      std::vector<Expr> xs;
      xs.reserve(e->children.size());
      for (const auto& c : e->children) xs.push_back(substitute(c, repl));
      return dcall(e->call_name, e->dorders, std::move(xs));
    }
  }
  return e;
}

inline Expr substitute(const Expr& e, SymbolId var, const Expr& value) {
  return substitute(e, std::map<SymbolId, Expr>{{var, value}});
}

// A function definition: body written in the given formal symbols.
struct Instantiation {
  std::vector<SymbolId> formals;
  Expr body;
};

// Derivative of a definition body per accumulated per-argument orders.
inline Expr derived_body(const Instantiation& def, const std::vector<int>& dorders) {
  Expr b = def.body;
  for (std::size_t i = 0; i < dorders.size() && i < def.formals.size(); ++i)
    b = differentiate(b, def.formals[i], dorders[i]);
  return b;
}

// Replaces every call whose name appears in defs by its (differentiated)
// definition with formals bound to the actual arguments. Unknown calls stay.
inline Expr substitute_calls(const Expr& e, const std::map<std::string, Instantiation>& defs) {
  switch (e->kind) {
    case Kind::Number:
    case Kind::Symbol: return e;
    case Kind::Sum:
    case Kind::Product: {
      std::vector<Expr> xs;
      xs.reserve(e->children.size());
      for (const auto& c : e->children) xs.push_back(substitute_calls(c, defs));
      return e->kind == Kind::Sum ? add(std::move(xs)) : mul(std::move(xs));
    }
    case Kind::Power: return pow_e(substitute_calls(e->children[0], defs), e->expo);
    case Kind::Call: {
      std::vector<Expr> args;
      args.reserve(e->children.size());
      for (const auto& c : e->children) args.push_back(substitute_calls(c, defs));
      auto it = defs.find(e->call_name);
      if (it == defs.end()) return dcall(e->call_name, e->dorders, std::move(args));
      const Instantiation& def = it->second;
      if (def.formals.size() != args.size())
        throw expr_error("call '" + e->call_name + "': definition arity mismatch");
      Expr body = derived_body(def, e->dorders);
      std::map<SymbolId, Expr> bind;
      for (std::size_t i = 0; i < args.size(); ++i) bind[def.formals[i]] = args[i];
      return substitute(body, bind);
    }
  }
  return e;
}

}  // namespace bouton
