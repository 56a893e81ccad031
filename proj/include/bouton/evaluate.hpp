#pragma once
// Numeric evaluation with domain guards, deterministic sampling, and the
// combined structural/probabilistic zero test.
//
// Evaluation tracks the largest intermediate magnitude so the zero test can
// use the relative acceptance threshold |value| < tol * (1 + max magnitude).
// Points reject (and resample) when a denominator or radicand comes within
// 1e-6 of zero. Opaque calls evaluate through registered instantiations;
// calls without one get a deterministic random polynomial instantiation.

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bouton/calculus.hpp"
#include "bouton/printer.hpp"
#include "bouton/reduce.hpp"

namespace bouton {

class eval_error : public std::runtime_error {
 public:
  explicit eval_error(const std::string& what) : std::runtime_error(what) {}
};

// A sampled point is too close to a singularity; the caller should resample.
class eval_domain_error : public std::runtime_error {
 public:
  explicit eval_domain_error(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kDomainGuard = 1e-6;

struct EvalOut {
  double value = 0.0;
  double maxmag = 0.0;
};

using CallDefs = std::map<std::string, Instantiation>;

struct EvalEnv {
  std::map<SymbolId, double> values;
  const CallDefs* defs = nullptr;
  // Cache of differentiated definition bodies, shared across evaluations.
  std::map<std::pair<std::string, std::vector<int>>, Expr>* dcache = nullptr;
};

inline EvalOut eval(const Expr& e, EvalEnv& env) {
  switch (e->kind) {
    case Kind::Number: {
      double v = e->value.to_double();
      return {v, std::abs(v)};
    }
    case Kind::Symbol: {
      auto it = env.values.find(e->sym);
      if (it == env.values.end())
        throw eval_error("no value bound for symbol '" + symbol_name(e->sym) + "'");
      return {it->second, std::abs(it->second)};
    }
    case Kind::Sum: {
      double acc = 0.0, mm = 0.0;
      for (const auto& c : e->children) {
        EvalOut r = eval(c, env);
        acc += r.value;
        mm = std::max(mm, r.maxmag);
      }
      return {acc, std::max(mm, std::abs(acc))};
    }
    case Kind::Product: {
      double acc = 1.0, mm = 0.0;
      for (const auto& c : e->children) {
        EvalOut r = eval(c, env);
        acc *= r.value;
        mm = std::max(mm, r.maxmag);
      }
      return {acc, std::max(mm, std::abs(acc))};
    }
    case Kind::Power: {
      EvalOut b = eval(e->children[0], env);
      double r;
      if (e->expo.is_integer()) {
        if (e->expo.sign() < 0 && std::abs(b.value) < kDomainGuard)
          throw eval_domain_error("denominator too close to zero");
        r = std::pow(b.value, static_cast<double>(e->expo.num()));
      } else {
        if (b.value < kDomainGuard)
          throw eval_domain_error("radicand too close to zero or negative");
        r = std::pow(b.value, e->expo.to_double());
      }
      if (!std::isfinite(r)) throw eval_domain_error("non-finite power result");
      return {r, std::max(b.maxmag, std::abs(r))};
    }
    case Kind::Call: {
      if (!env.defs)
        throw eval_error("no instantiation registered for call '" + e->call_name + "'");
      auto it = env.defs->find(e->call_name);
      if (it == env.defs->end())
        throw eval_error("no instantiation registered for call '" + e->call_name + "'");
      const Instantiation& def = it->second;
      if (def.formals.size() != e->children.size())
        throw eval_error("instantiation arity mismatch for call '" + e->call_name + "'");
      Expr body;
      if (env.dcache) {
        auto key = std::make_pair(e->call_name, e->dorders);
        auto cit = env.dcache->find(key);
        if (cit != env.dcache->end()) body = cit->second;
        else {
          body = derived_body(def, e->dorders);
          env.dcache->emplace(std::move(key), body);
        }
      } else {
        body = derived_body(def, e->dorders);
      }
      double mm = 0.0;
      EvalEnv sub{env.values, env.defs, env.dcache};
      for (std::size_t i = 0; i < e->children.size(); ++i) {
        EvalOut a = eval(e->children[i], env);
        mm = std::max(mm, a.maxmag);
        sub.values[def.formals[i]] = a.value;
      }
      EvalOut r = eval(body, sub);
      return {r.value, std::max({mm, r.maxmag, std::abs(r.value)})};
    }
  }
  throw eval_error("unhandled expression kind");
}

// --- deterministic sampling -------------------------------------------------

// Magnitudes in [0.5, 2]; spatial coordinates and velocity components get a
// random sign, while t, p and parameters stay positive. cos_theta/sin_theta
// are linked: both come from one sampled angle.
inline std::map<SymbolId, double> sample_point(const std::set<SymbolId>& syms,
                                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::uniform_real_distribution<double> angle(0.2, 1.2);
  std::map<SymbolId, double> out;
  if (syms.count(SYM_COS_THETA) || syms.count(SYM_SIN_THETA)) {
    double th = angle(rng);
    out[SYM_COS_THETA] = std::cos(th);
    out[SYM_SIN_THETA] = std::sin(th);
  }
  for (SymbolId id : syms) {
    if (id == SYM_COS_THETA || id == SYM_SIN_THETA) continue;
    const SymbolInfo& info = symbol_info(id);
    if (info.kind == SymbolKind::Formal) continue;
    double m = mag(rng);
    bool signable = (id == SYM_X || id == SYM_Y || id == SYM_Z || id == SYM_U ||
                     id == SYM_V || id == SYM_W);
    if (signable && (rng() & 1u)) m = -m;
    out[id] = m;
  }
  return out;
}

// Shared formal symbols used by generated instantiations.
inline SymbolId generated_formal(std::size_t i) {
  return intern_symbol("@a" + std::to_string(i + 1), SymbolKind::Formal);
}

// Deterministic dense random polynomial of total degree <= 2 in the formals.
inline Instantiation random_instantiation(std::size_t arity, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> numer(-12, 12);
  std::uniform_int_distribution<int> denom(1, 4);
  auto coeff = [&](bool force_nonzero) {
    int n = numer(rng);
    if (force_nonzero && n == 0) n = 7;
    return Rational(n, denom(rng));
  };
  Instantiation def;
  for (std::size_t i = 0; i < arity; ++i) def.formals.push_back(generated_formal(i));
  std::vector<Expr> terms;
  terms.push_back(num(coeff(false)));
  for (std::size_t i = 0; i < arity; ++i)
    terms.push_back(mul({num(coeff(true)), symbol(def.formals[i])}));
  for (std::size_t i = 0; i < arity; ++i)
    for (std::size_t j = i; j < arity; ++j)
      terms.push_back(
          mul({num(coeff(false)), symbol(def.formals[i]), symbol(def.formals[j])}));
  def.body = add(std::move(terms));
  return def;
}

// --- zero testing -----------------------------------------------------------

struct ZeroOptions {
  int points = 25;
  double tol = 1e-9;
  std::uint64_t seed = 12345;
  const CallDefs* defs = nullptr;   // known instantiations (others are generated)
  std::size_t max_terms = 100000;   // structural reduction budget
  bool skip_structural = false;
  bool structural_only = false;
};

struct ZeroWitness {
  std::map<SymbolId, double> point;
  double value = 0.0;
  double scale = 0.0;  // 1 + max intermediate magnitude at the witness point
};

struct ZeroResult {
  enum class Verdict { ZeroStructural, ZeroProbabilistic, NonZero, Undetermined };
  Verdict verdict = Verdict::Undetermined;
  std::optional<ZeroWitness> witness;
  bool is_zero() const {
    return verdict == Verdict::ZeroStructural || verdict == Verdict::ZeroProbabilistic;
  }
};

inline const char* to_cstring(ZeroResult::Verdict v) {
  switch (v) {
    case ZeroResult::Verdict::ZeroStructural: return "zero (structural)";
    case ZeroResult::Verdict::ZeroProbabilistic: return "zero (probabilistic)";
    case ZeroResult::Verdict::NonZero: return "nonzero";
    case ZeroResult::Verdict::Undetermined: return "undetermined";
  }
  return "?";
}

inline ZeroResult is_zero(const Expr& e, const ZeroOptions& opts = {}) {
  if (is_zero_literal(e)) return {ZeroResult::Verdict::ZeroStructural, std::nullopt};
  if (!opts.skip_structural) {
    StructuralZero s = structural_zero(e, opts.max_terms);
    if (s.is_zero()) return {ZeroResult::Verdict::ZeroStructural, std::nullopt};
  }
  if (opts.structural_only) return {ZeroResult::Verdict::Undetermined, std::nullopt};

  std::mt19937_64 rng(opts.seed);
  // Instantiations: start from the registered ones, generate the rest.
  CallDefs defs = opts.defs ? *opts.defs : CallDefs{};
  std::set<SymbolId> syms = free_symbols(e);
  std::set<CallSig> sigs = call_signatures(e);
  for (int round = 0; round < 5; ++round) {
    bool changed = false;
    for (const auto& sig : sigs) {
      if (defs.count(sig.name)) continue;
      defs.emplace(sig.name, random_instantiation(sig.arity, rng));
      changed = true;
    }
    std::set<CallSig> next = sigs;
    for (const auto& [name, def] : defs) {
      for (SymbolId s : free_symbols(def.body)) {
        if (symbol_info(s).kind != SymbolKind::Formal && !syms.count(s)) {
          syms.insert(s);
          changed = true;
        }
      }
      for (const auto& sig : call_signatures(def.body))
        if (next.insert(sig).second) changed = true;
    }
    sigs = std::move(next);
    if (!changed) break;
  }

  std::map<std::pair<std::string, std::vector<int>>, Expr> dcache;
  for (int i = 0; i < opts.points; ++i) {
    bool done = false;
    for (int attempt = 0; attempt < 300 && !done; ++attempt) {
      auto point = sample_point(syms, rng);
      EvalEnv env{point, &defs, &dcache};
      try {
        EvalOut r = eval(e, env);
        double scale = 1.0 + r.maxmag;
        if (std::abs(r.value) > opts.tol * scale)
          return {ZeroResult::Verdict::NonZero,
                  ZeroWitness{std::move(point), r.value, scale}};
        done = true;
      } catch (const eval_domain_error&) {
        // resample
      }
    }
    if (!done)
      throw eval_error("could not find an admissible sample point (300 attempts)");
  }
  return {ZeroResult::Verdict::ZeroProbabilistic, std::nullopt};
}

// Convenience: zero test of a difference.
inline ZeroResult equivalent(const Expr& a, const Expr& b, const ZeroOptions& opts = {}) {
  return is_zero(a - b, opts);
}

}  // namespace bouton
