#pragma once
// Immutable symbolic expressions over exact rationals.
//
// Nodes are shared_ptr<const ExprNode>; every Expr handed out by the factory
// functions below is in normal form:
//   * sums are flattened, like terms combined, terms in canonical order,
//     rational constants folded into a single leading term;
//   * products are flattened, same-base powers combined, the rational
//     coefficient folded into a single leading Number child;
//   * powers carry exact rational exponents, fold numeric bases when the
//     result is exact, distribute integer exponents over products, and merge
//     nested powers when that is valid for real principal powers;
//   * normalization is idempotent and free of pointer identity, so structural
//     order and equality are deterministic across runs.
// No distribution of products over sums happens here (see reduce.hpp).

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bouton/rational.hpp"
#include "bouton/symbols.hpp"

namespace bouton {

class expr_error : public std::runtime_error {
 public:
  explicit expr_error(const std::string& what) : std::runtime_error(what) {}
};

enum class Kind : unsigned char { Number, Symbol, Power, Product, Sum, Call };

class ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

class ExprNode {
 public:
  Kind kind;
  Rational value;               // Number
  SymbolId sym = -1;            // Symbol
  Rational expo;                // Power exponent (base is children[0])
  std::string call_name;        // Call
  std::vector<int> dorders;     // Call: per-argument derivative counts
  std::vector<Expr> children;   // Power base / Product factors / Sum terms / Call args
  std::size_t hash = 0;

  explicit ExprNode(Kind k) : kind(k) {}
};

namespace detail {

inline std::size_t hash_mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

inline std::size_t compute_hash(const ExprNode& n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ULL + 14695981039346656037ULL;
  switch (n.kind) {
    case Kind::Number: h = hash_mix(h, n.value.hash()); break;
    case Kind::Symbol: h = hash_mix(h, static_cast<std::size_t>(n.sym)); break;
    case Kind::Power: h = hash_mix(h, n.expo.hash()); break;
    case Kind::Call:
      h = hash_mix(h, std::hash<std::string>{}(n.call_name));
      for (int d : n.dorders) h = hash_mix(h, static_cast<std::size_t>(d) + 1);
      break;
    default: break;
  }
  for (const auto& c : n.children) h = hash_mix(h, c->hash);
  return h;
}

}  // namespace detail

// --- structural order -------------------------------------------------------

inline int cmp(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return 0;
  auto rank = [](Kind k) {
    switch (k) {
      case Kind::Number: return 0;
      case Kind::Symbol: return 1;
      case Kind::Power: return 2;
      case Kind::Product: return 3;
      case Kind::Sum: return 4;
      case Kind::Call: return 5;
    }
    return 6;
  };
  if (a->kind != b->kind) return rank(a->kind) < rank(b->kind) ? -1 : 1;
  auto cmp_rat = [](const Rational& x, const Rational& y) {
    if (x == y) return 0;
    return x < y ? -1 : 1;
  };
  auto cmp_children = [](const std::vector<Expr>& xs, const std::vector<Expr>& ys) {
    std::size_t n = std::min(xs.size(), ys.size());
    for (std::size_t i = 0; i < n; ++i)
      if (int c = cmp(xs[i], ys[i]); c != 0) return c;
    if (xs.size() != ys.size()) return xs.size() < ys.size() ? -1 : 1;
    return 0;
  };
  switch (a->kind) {
    case Kind::Number: return cmp_rat(a->value, b->value);
    case Kind::Symbol: return a->sym < b->sym ? -1 : (a->sym > b->sym ? 1 : 0);
    case Kind::Power:
      if (int c = cmp(a->children[0], b->children[0]); c != 0) return c;
      return cmp_rat(a->expo, b->expo);
    case Kind::Product:
    case Kind::Sum: return cmp_children(a->children, b->children);
    case Kind::Call:
      if (int c = a->call_name.compare(b->call_name); c != 0) return c < 0 ? -1 : 1;
      if (a->dorders != b->dorders) return a->dorders < b->dorders ? -1 : 1;
      return cmp_children(a->children, b->children);
  }
  return 0;
}

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return cmp(a, b) < 0; }
};

inline bool equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash) return false;
  return cmp(a, b) == 0;
}

// --- basic predicates -------------------------------------------------------

inline bool is_number(const Expr& e) { return e->kind == Kind::Number; }
inline bool is_zero_literal(const Expr& e) {
  return e->kind == Kind::Number && e->value.is_zero();
}
inline bool is_one_literal(const Expr& e) {
  return e->kind == Kind::Number && e->value.is_one();
}

// True when the expression is certainly >= 0 on its real domain: nonnegative
// numbers, positivity-flagged symbols, even powers, principal fractional
// powers (nonnegative wherever defined), and sums/products of such.
inline bool is_nonneg_certain(const Expr& e) {
  switch (e->kind) {
    case Kind::Number: return !e->value.is_negative();
    case Kind::Symbol: return symbol_info(e->sym).positive;
    case Kind::Power:
      if (!e->expo.is_integer()) return true;
      if (e->expo.num() % 2 == 0) return true;
      return is_nonneg_certain(e->children[0]);
    case Kind::Product:
    case Kind::Sum:
      return std::all_of(e->children.begin(), e->children.end(),
                         [](const Expr& c) { return is_nonneg_certain(c); });
    case Kind::Call: return false;
  }
  return false;
}

// --- factories --------------------------------------------------------------

Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow_e(const Expr& base, const Rational& expo);

inline Expr num(const Rational& r) {
  auto n = std::make_shared<ExprNode>(Kind::Number);
  n->value = r;
  n->hash = detail::compute_hash(*n);
  return n;
}
inline Expr num(std::int64_t n) { return num(Rational(n)); }
inline Expr num(std::int64_t n, std::int64_t d) { return num(Rational(n, d)); }

inline const Expr& expr_zero() {
  static const Expr z = num(0);
  return z;
}
inline const Expr& expr_one() {
  static const Expr o = num(1);
  return o;
}

inline Expr symbol(SymbolId id) {
  auto n = std::make_shared<ExprNode>(Kind::Symbol);
  n->sym = id;
  n->hash = detail::compute_hash(*n);
  return n;
}
inline Expr symbol(std::string_view name) { return symbol(intern_symbol(name)); }

// Call with explicit per-argument derivative counts (all zero = plain call).
inline Expr dcall(std::string name, std::vector<int> dorders, std::vector<Expr> args) {
  if (dorders.size() != args.size())
    throw expr_error("call '" + name + "': derivative-count list does not match arity");
  for (int d : dorders)
    if (d < 0) throw expr_error("call '" + name + "': negative derivative count");
  for (const auto& a : args)
    if (!a) throw expr_error("call '" + name + "': null argument");
  auto n = std::make_shared<ExprNode>(Kind::Call);
  n->call_name = std::move(name);
  n->dorders = std::move(dorders);
  n->children = std::move(args);
  n->hash = detail::compute_hash(*n);
  return n;
}

inline Expr call(std::string name, std::vector<Expr> args) {
  std::vector<int> d(args.size(), 0);
  return dcall(std::move(name), std::move(d), std::move(args));
}

namespace detail {

// Splits a normalized term into (rational coefficient, monic remainder).
inline std::pair<Rational, Expr> split_coeff(const Expr& term) {
  if (term->kind == Kind::Number) return {term->value, expr_one()};
  if (term->kind == Kind::Product && term->children[0]->kind == Kind::Number) {
    if (term->children.size() == 2) return {term->children[0]->value, term->children[1]};
    auto monic = std::make_shared<ExprNode>(Kind::Product);
    monic->children.assign(term->children.begin() + 1, term->children.end());
    monic->hash = compute_hash(*monic);
    return {term->children[0]->value, Expr(monic)};
  }
  return {Rational(1), term};
}

// Reattaches a coefficient to a monic part without re-running normalization.
inline Expr with_coeff(const Rational& c, const Expr& monic) {
  if (c.is_zero()) return expr_zero();
  if (is_one_literal(monic)) return num(c);
  if (c.is_one()) return monic;
  auto n = std::make_shared<ExprNode>(Kind::Product);
  n->children.push_back(num(c));
  if (monic->kind == Kind::Product)
    n->children.insert(n->children.end(), monic->children.begin(), monic->children.end());
  else
    n->children.push_back(monic);
  n->hash = compute_hash(*n);
  return n;
}

inline std::pair<Expr, Rational> base_exp_of(const Expr& f) {
  if (f->kind == Kind::Power) return {f->children[0], f->expo};
  return {f, Rational(1)};
}

}  // namespace detail

inline Expr add(std::vector<Expr> terms) {
  Rational acc(0);
  std::map<Expr, Rational, ExprLess> by_monic;
  std::vector<Expr> work(std::move(terms));
  while (!work.empty()) {
    Expr e = std::move(work.back());
    work.pop_back();
    if (!e) throw expr_error("add: null term");
    if (e->kind == Kind::Number) {
      acc += e->value;
    } else if (e->kind == Kind::Sum) {
      work.insert(work.end(), e->children.begin(), e->children.end());
    } else {
      auto [c, monic] = detail::split_coeff(e);
      by_monic[monic] += c;
    }
  }
  std::vector<Expr> children;
  if (!acc.is_zero()) children.push_back(num(acc));
  for (const auto& [monic, c] : by_monic) {
    if (c.is_zero()) continue;
    children.push_back(detail::with_coeff(c, monic));
  }
  if (children.empty()) return expr_zero();
  if (children.size() == 1) return children[0];
  auto n = std::make_shared<ExprNode>(Kind::Sum);
  n->children = std::move(children);
  n->hash = detail::compute_hash(*n);
  return n;
}

inline Expr mul(std::vector<Expr> factors) {
  Rational coeff(1);
  bool saw_zero = false;
  std::map<Expr, Rational, ExprLess> by_base;
  std::vector<Expr> work(std::move(factors));
  while (!work.empty()) {
    Expr e = std::move(work.back());
    work.pop_back();
    if (!e) throw expr_error("mul: null factor");
    if (e->kind == Kind::Number) {
      if (e->value.is_zero()) saw_zero = true;
      else coeff *= e->value;
    } else if (e->kind == Kind::Product) {
      work.insert(work.end(), e->children.begin(), e->children.end());
    } else {
      auto [base, exp] = detail::base_exp_of(e);
      by_base[base] += exp;
    }
  }
  if (saw_zero) return expr_zero();
  std::vector<Expr> rebuilt;
  std::vector<Expr> respill;  // pow() returned a Product/Number: reprocess once
  for (const auto& [base, exp] : by_base) {
    if (exp.is_zero()) continue;
    Expr r = (exp.is_one()) ? base : pow_e(base, exp);
    if (r->kind == Kind::Number) {
      if (r->value.is_zero()) return expr_zero();
      coeff *= r->value;
    } else if (r->kind == Kind::Product) {
      respill.push_back(r);
    } else {
      rebuilt.push_back(r);
    }
  }
  if (!respill.empty()) {
    // Exponent merging produced composite factors (e.g. an integer power
    // distributed over a product base); one more pass reaches the fixpoint.
    respill.push_back(num(coeff));
    respill.insert(respill.end(), rebuilt.begin(), rebuilt.end());
    return mul(std::move(respill));
  }
  if (coeff.is_zero()) return expr_zero();
  if (rebuilt.empty()) return num(coeff);
  if (coeff.is_one() && rebuilt.size() == 1) return rebuilt[0];
  std::vector<Expr> children;
  if (!coeff.is_one()) children.push_back(num(coeff));
  children.insert(children.end(), rebuilt.begin(), rebuilt.end());
  if (children.size() == 1) return children[0];
  auto n = std::make_shared<ExprNode>(Kind::Product);
  n->children = std::move(children);
  n->hash = detail::compute_hash(*n);
  return n;
}

inline Expr pow_e(const Expr& base, const Rational& expo) {
  if (!base) throw expr_error("pow: null base");
  if (expo.is_zero()) return expr_one();
  if (expo.is_one()) return base;
  if (base->kind == Kind::Number) {
    const Rational& v = base->value;
    if (v.is_zero()) {
      if (expo.sign() > 0) return expr_zero();
      throw expr_error("zero raised to a nonpositive power");
    }
    if (v.is_one()) return expr_one();
    if (expo.is_integer()) {
      try {
        return num(v.pow(expo.num()));
      } catch (const overflow_error&) {
        // fall through to a symbolic power node
      }
    } else {
      try {
        Rational w = v.pow(expo.num());  // absorb the numerator exactly
        auto rn = exact_nth_root(w.num(), static_cast<int>(expo.den()));
        auto rd = exact_nth_root(w.den(), static_cast<int>(expo.den()));
        if (rn && rd) return num(Rational(*rn, *rd));
        auto n = std::make_shared<ExprNode>(Kind::Power);
        n->children.push_back(num(w));
        n->expo = Rational(1, expo.den());
        n->hash = detail::compute_hash(*n);
        return n;
      } catch (const overflow_error&) {
        // fall through to a symbolic power node
      }
    }
  }
  if (base->kind == Kind::Power) {
    // (b^e1)^e2 -> b^(e1*e2) is valid for integer e2, and for any e2 when b
    // is nonnegative; otherwise keep the nesting ((x^2)^(1/2) is |x|, not x).
    if (expo.is_integer() || is_nonneg_certain(base->children[0]))
      return pow_e(base->children[0], base->expo * expo);
  }
  if (base->kind == Kind::Product) {
    if (expo.is_integer()) {
      std::vector<Expr> fs;
      fs.reserve(base->children.size());
      for (const auto& c : base->children) fs.push_back(pow_e(c, expo));
      return mul(std::move(fs));
    }
    std::vector<Expr> pc, rest;
    for (const auto& c : base->children) {
      if (is_nonneg_certain(c)) pc.push_back(c);
      else rest.push_back(c);
    }
    if (!pc.empty() && !rest.empty()) {
      std::vector<Expr> fs;
      for (const auto& c : pc) fs.push_back(pow_e(c, expo));
      fs.push_back(pow_e(mul(std::move(rest)), expo));
      return mul(std::move(fs));
    }
    if (rest.empty()) {
      std::vector<Expr> fs;
      for (const auto& c : pc) fs.push_back(pow_e(c, expo));
      return mul(std::move(fs));
    }
    // fall through: keep the whole (sign-uncertain) product as the base
  }
  auto n = std::make_shared<ExprNode>(Kind::Power);
  n->children.push_back(base);
  n->expo = expo;
  n->hash = detail::compute_hash(*n);
  return n;
}

// --- convenience operators --------------------------------------------------

inline Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({num(-1), b})}); }
inline Expr operator-(const Expr& a) { return mul({num(-1), a}); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow_e(b, Rational(-1))}); }
inline Expr pw(const Expr& b, std::int64_t e) { return pow_e(b, Rational(e)); }
inline Expr pw(const Expr& b, const Rational& e) { return pow_e(b, e); }
inline Expr sqrt_e(const Expr& b) { return pow_e(b, Rational(1, 2)); }

// --- queries ----------------------------------------------------------------

inline void collect_symbols(const Expr& e, std::set<SymbolId>& out) {
  if (e->kind == Kind::Symbol) out.insert(e->sym);
  for (const auto& c : e->children) collect_symbols(c, out);
}

inline std::set<SymbolId> free_symbols(const Expr& e) {
  std::set<SymbolId> s;
  collect_symbols(e, s);
  return s;
}

inline bool depends_on(const Expr& e, SymbolId id) {
  if (e->kind == Kind::Symbol) return e->sym == id;
  for (const auto& c : e->children)
    if (depends_on(c, id)) return true;
  return false;
}

struct CallSig {
  std::string name;
  std::size_t arity;
  auto operator<=>(const CallSig&) const = default;
};

inline void collect_calls(const Expr& e, std::set<CallSig>& out) {
  if (e->kind == Kind::Call) out.insert(CallSig{e->call_name, e->children.size()});
  for (const auto& c : e->children) collect_calls(c, out);
}

inline std::set<CallSig> call_signatures(const Expr& e) {
  std::set<CallSig> s;
  collect_calls(e, s);
  return s;
}

inline std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (const auto& c : e->children) n += node_count(c);
  return n;
}

// Number of top-level terms when viewed as a sum.
inline std::size_t term_count(const Expr& e) {
  return e->kind == Kind::Sum ? e->children.size() : 1;
}

}  // namespace bouton
