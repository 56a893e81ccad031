#pragma once
// Structural reduction to a flat sum of monomial terms, and by extension a
// sound structural zero test.
//
// Pipeline: distribute products over sums and expand integer powers of sums;
// rewrite even powers of sin_theta via sin^2 = 1 - cos^2 (the linked rotation
// pair); clear denominators that are powers of composite "sum atoms" by
// multiplying the whole expression through (sound away from the atom's zero
// set, which the sampling domain excludes); peel integer parts of fractional
// sum-atom powers so cofactors of a given radical merge term-by-term. A sum
// A + B*sqrt(S) with rational-function A, B vanishes identically iff A and B
// both vanish (S is not a perfect square), so termwise cancellation after
// these steps is a complete zero test for the expression classes used here.
// Everything is budgeted by intermediate term count: exceeding the budget
// gives an explicit "undetermined" status, never a wrong answer.

#include <optional>
#include <vector>

#include "bouton/calculus.hpp"
#include "bouton/expr.hpp"

namespace bouton {

namespace detail {

struct ReduceCtx {
  std::size_t cap = 100000;
  bool exceeded = false;

  bool ok(std::size_t n) {
    if (n > cap) exceeded = true;
    return !exceeded;
  }
};

std::vector<Expr> expand_terms(const Expr& e, ReduceCtx& ctx);

// Expand to a single (normalized, merged) expression; Expr() when over budget.
inline Expr expand_rebuild(const Expr& e, ReduceCtx& ctx) {
  auto ts = expand_terms(e, ctx);
  if (ctx.exceeded) return Expr();
  return add(std::move(ts));
}

// A "flat" term multiplies atomic factors only: no sum factors and no sum
// bases raised to exponents that still admit distribution or peeling.
inline bool is_flat_factor(const Expr& f) {
  switch (f->kind) {
    case Kind::Number:
    case Kind::Symbol:
    case Kind::Call: return true;
    case Kind::Sum: return false;
    case Kind::Power: {
      const Expr& b = f->children[0];
      if (b->kind != Kind::Sum) return true;
      if (f->expo.sign() < 0) return true;                       // cleared later
      return !f->expo.is_integer() && f->expo < Rational(1);     // radical residue
    }
    case Kind::Product: return false;  // caller inspects children
  }
  return true;
}

inline bool is_flat_term(const Expr& t) {
  if (t->kind == Kind::Product) {
    for (const auto& c : t->children)
      if (c->kind == Kind::Sum || c->kind == Kind::Product || !is_flat_factor(c)) return false;
    return true;
  }
  return is_flat_factor(t);
}

inline void append_flat(std::vector<Expr>& out, const Expr& term, ReduceCtx& ctx) {
  if (ctx.exceeded) return;
  if (is_zero_literal(term)) return;
  if (is_flat_term(term)) {
    out.push_back(term);
    ctx.ok(out.size());
    return;
  }
  auto sub = expand_terms(term, ctx);
  if (ctx.exceeded) return;
  out.insert(out.end(), sub.begin(), sub.end());
  ctx.ok(out.size());
}

inline std::vector<Expr> expand_terms(const Expr& e, ReduceCtx& ctx) {
  std::vector<Expr> out;
  if (ctx.exceeded) return out;
  switch (e->kind) {
    case Kind::Number:
      if (!e->value.is_zero()) out.push_back(e);
      break;
    case Kind::Symbol: out.push_back(e); break;
    case Kind::Call: {
      std::vector<Expr> args;
      args.reserve(e->children.size());
      for (const auto& a : e->children) {
        Expr ax = expand_rebuild(a, ctx);
        if (ctx.exceeded) return {};
        args.push_back(ax);
      }
      out.push_back(dcall(e->call_name, e->dorders, std::move(args)));
      break;
    }
    case Kind::Sum:
      for (const auto& c : e->children) {
        auto ts = expand_terms(c, ctx);
        if (ctx.exceeded) return {};
        out.insert(out.end(), ts.begin(), ts.end());
        if (!ctx.ok(out.size())) return {};
      }
      break;
    case Kind::Product: {
      std::vector<Expr> acc{expr_one()};
      for (const auto& c : e->children) {
        auto fs = expand_terms(c, ctx);
        if (ctx.exceeded) return {};
        if (fs.empty()) return {};  // a factor reduced to zero
        if (!ctx.ok(acc.size() * fs.size())) return {};
        std::vector<Expr> next;
        next.reserve(acc.size() * fs.size());
        for (const auto& a : acc)
          for (const auto& f : fs) {
            append_flat(next, mul({a, f}), ctx);
            if (ctx.exceeded) return {};
          }
        acc = std::move(next);
        if (acc.empty()) return {};  // everything cancelled to zero
      }
      out = std::move(acc);
      break;
    }
    case Kind::Power: {
      Expr base = expand_rebuild(e->children[0], ctx);
      if (ctx.exceeded) return {};
      const Rational& ex = e->expo;
      if (base->kind != Kind::Sum) {
        append_flat(out, pow_e(base, ex), ctx);
        break;
      }
      if (ex.is_integer() && ex.sign() > 0) {
        std::vector<Expr> acc{expr_one()};
        for (std::int64_t i = 0; i < ex.num(); ++i) {
          if (!ctx.ok(acc.size() * base->children.size())) return {};
          std::vector<Expr> next;
          for (const auto& a : acc)
            for (const auto& f : base->children) {
              append_flat(next, mul({a, f}), ctx);
              if (ctx.exceeded) return {};
            }
          acc = std::move(next);
          if (acc.empty()) return {};
        }
        out = std::move(acc);
      } else if (!ex.is_integer() && ex > Rational(1)) {
        // Peel the integer part so radical cofactors merge termwise.
        Rational ip(ex.num() / ex.den());
        Rational residue = ex - ip;
        auto ints = expand_terms(pow_e(base, ip), ctx);
        if (ctx.exceeded) return {};
        Expr atom = pow_e(base, residue);
        for (const auto& t : ints) {
          append_flat(out, mul({t, atom}), ctx);
          if (ctx.exceeded) return {};
        }
      } else {
        out.push_back(pow_e(base, ex));  // negative or in (0,1): atomic
      }
      break;
    }
  }
  if (!ctx.ok(out.size())) return {};
  return out;
}

inline void for_each_factor(const Expr& term, const auto& fn) {
  auto one_factor = [&fn](const Expr& f) {
    if (f->kind == Kind::Power) fn(f->children[0], f->expo);
    else if (f->kind != Kind::Number) fn(f, Rational(1));
  };
  if (term->kind == Kind::Product)
    for (const auto& c : term->children) one_factor(c);
  else
    one_factor(term);
}

// Rewrites sin_theta^k (k >= 2 or k <= -1) via sin^2 = 1 - cos^2 in every term.
inline void trig_reduce(std::vector<Expr>& terms, ReduceCtx& ctx) {
  static const Expr kSinSq = [] {
    return add({expr_one(), mul({num(-1), pow_e(symbol(SYM_COS_THETA), Rational(2))})});
  }();
  const Expr sin_sym = symbol(SYM_SIN_THETA);
  std::vector<Expr> out;
  std::vector<Expr> work(std::move(terms));
  while (!work.empty() && !ctx.exceeded) {
    Expr t = std::move(work.back());
    work.pop_back();
    Rational k(0);
    bool found = false;
    for_each_factor(t, [&](const Expr& b, const Rational& ex) {
      if (b->kind == Kind::Symbol && b->sym == SYM_SIN_THETA && ex.is_integer() &&
          (ex >= Rational(2) || ex.sign() < 0)) {
        k = ex;
        found = true;
      }
    });
    if (!found) {
      out.push_back(std::move(t));
      ctx.ok(out.size());
      continue;
    }
    std::int64_t ki = k.num();
    std::int64_t m = ki >= 2 ? ki / 2 : (-ki + 1) / 2;
    std::int64_t kp = ki >= 2 ? ki - 2 * m : ki + 2 * m;  // residue in {0, 1}
    Expr repl = mul({t, pow_e(sin_sym, Rational(kp - ki)), pow_e(kSinSq, Rational((ki - kp) / 2))});
    append_flat(work, repl, ctx);
  }
  terms = std::move(out);
}

}  // namespace detail

// Fully distributed form of e (like terms merged); nullopt over budget.
inline std::optional<Expr> expand_expr(const Expr& e, std::size_t max_terms = 100000) {
  detail::ReduceCtx ctx{max_terms};
  auto ts = detail::expand_terms(e, ctx);
  if (ctx.exceeded) return std::nullopt;
  detail::trig_reduce(ts, ctx);
  if (ctx.exceeded) return std::nullopt;
  return add(std::move(ts));
}

struct StructuralZero {
  enum class Status { Zero, NotShown, Budget };
  Status status;
  Expr reduced;  // flat form reached before the verdict (null for Budget)
  bool is_zero() const { return status == Status::Zero; }
};

// Expansion plus sum-atom denominator clearing, then a literal-zero check.
inline StructuralZero structural_zero(const Expr& e, std::size_t max_terms = 100000) {
  if (is_zero_literal(e)) return {StructuralZero::Status::Zero, e};
  detail::ReduceCtx ctx{max_terms};
  auto terms = detail::expand_terms(e, ctx);
  if (ctx.exceeded) return {StructuralZero::Status::Budget, Expr()};
  detail::trig_reduce(terms, ctx);
  for (int pass = 0; pass < 8 && !ctx.exceeded; ++pass) {
    std::map<Expr, Rational, ExprLess> negs;
    for (const auto& t : terms)
      detail::for_each_factor(t, [&](const Expr& b, const Rational& ex) {
        if (b->kind == Kind::Sum && ex.sign() < 0) {
          auto it = negs.find(b);
          if (it == negs.end()) negs.emplace(b, ex);
          else if (ex < it->second) it->second = ex;
        }
      });
    if (negs.empty()) break;
    std::vector<Expr> clearers;
    clearers.reserve(negs.size());
    for (const auto& [b, m] : negs) clearers.push_back(pow_e(b, -m));
    std::vector<Expr> next;
    for (const auto& t : terms) {
      std::vector<Expr> fs{t};
      fs.insert(fs.end(), clearers.begin(), clearers.end());
      detail::append_flat(next, mul(std::move(fs)), ctx);
      if (ctx.exceeded) break;
    }
    terms = std::move(next);
    detail::trig_reduce(terms, ctx);
  }
  if (ctx.exceeded) return {StructuralZero::Status::Budget, Expr()};
  Expr merged = add(std::move(terms));
  if (is_zero_literal(merged)) return {StructuralZero::Status::Zero, merged};
  return {StructuralZero::Status::NotShown, merged};
}

}  // namespace bouton
