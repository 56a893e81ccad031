#pragma once
// Isobaric weight calculus and exponent-pair classification.
//
// A weight (a, b) records how a quantity rescales under the two-parameter
// scaling group: spatial dilation contributes k^(a*alpha_x) and time dilation
// k^(b*alpha_t), with table
//   x, y, z: (1, 0)   t, tau: (0, 1)   u, v, w: (1, -1)
//   p: (2, -2)        nu: (2, -1)      parameters/formals: (0, 0).
// Weights add under multiplication and scale under powers; a sum has a weight
// only when all terms agree. classify_exponents applies the 5/2 law to an
// exponent pair (with the severity and sign-split ratio comparisons reported
// alongside, never merged), and smoothness_scenario maps the pair to one of
// the six sign/criticality scenarios.

#include <optional>
#include <stdexcept>
#include <string>

#include "bouton/printer.hpp"
#include "bouton/reduce.hpp"

namespace bouton {

struct Weight {
  Rational a{0};
  Rational b{0};
  friend bool operator==(const Weight& x, const Weight& y) = default;
  Weight operator+(const Weight& o) const { return {a + o.a, b + o.b}; }
  Weight operator*(const Rational& r) const { return {a * r, b * r}; }
  bool is_zero() const { return a.is_zero() && b.is_zero(); }
  std::string str() const { return "(" + a.str() + ", " + b.str() + ")"; }
  // Exponent realized by the finite scaling with parameters (ax, at).
  Rational realized(const Rational& ax, const Rational& at) const { return a * ax + b * at; }
};

inline Weight symbol_weight(SymbolId id) {
  switch (id) {
    case SYM_X:
    case SYM_Y:
    case SYM_Z: return {Rational(1), Rational(0)};
    case SYM_T:
    case SYM_TAU: return {Rational(0), Rational(1)};
    case SYM_U:
    case SYM_V:
    case SYM_W: return {Rational(1), Rational(-1)};
    case SYM_P: return {Rational(2), Rational(-2)};
    case SYM_NU: return {Rational(2), Rational(-1)};
    default: return {Rational(0), Rational(0)};
  }
}

enum class WeightStatus { Uniform, Mixed, Undetermined };

struct WeightReport {
  WeightStatus status = WeightStatus::Undetermined;
  std::optional<Weight> weight;
  std::string note;
};

WeightReport weight_of(const Expr& e, std::size_t budget = 100000);

namespace detail {

// Weight of a single multiplicative factor base (no top-level sums of mixed
// weight, no opaque calls with weighted arguments).
inline std::optional<Weight> base_weight(const Expr& b, std::size_t budget) {
  switch (b->kind) {
    case Kind::Number: return Weight{};
    case Kind::Symbol: return symbol_weight(b->sym);
    case Kind::Power: {
      auto w = base_weight(b->children[0], budget);
      if (!w) return std::nullopt;
      return *w * b->expo;
    }
    case Kind::Product: {
      Weight acc;
      for (const auto& c : b->children) {
        auto w = base_weight(c, budget);
        if (!w) return std::nullopt;
        acc = acc + *w;
      }
      return acc;
    }
    case Kind::Sum: {
      WeightReport r = weight_of(b, budget);
      if (r.status == WeightStatus::Uniform) return r.weight;
      return std::nullopt;
    }
    case Kind::Call: {
      // A call is a weight-(0,0) atom when every argument is weight (0,0).
      for (const auto& a : b->children) {
        WeightReport r = weight_of(a, budget);
        if (r.status != WeightStatus::Uniform || !r.weight->is_zero()) return std::nullopt;
      }
      return Weight{};
    }
  }
  return std::nullopt;
}

inline std::optional<Weight> term_weight(const Expr& t, std::size_t budget) {
  return base_weight(t, budget);
}

}  // namespace detail

inline WeightReport weight_of(const Expr& e, std::size_t budget) {
  if (is_zero_literal(e))
    return {WeightStatus::Uniform, Weight{}, "zero expression (weight by convention)"};
  auto expanded = expand_expr(e, budget);
  if (!expanded)
    return {WeightStatus::Undetermined, std::nullopt, "expansion budget exceeded"};
  const Expr& x = *expanded;
  std::optional<Weight> acc;
  auto consider = [&](const Expr& term) -> std::optional<WeightReport> {
    auto w = detail::term_weight(term, budget);
    if (!w)
      return WeightReport{WeightStatus::Undetermined, std::nullopt,
                          "term has no well-defined weight: " + to_string(term)};
    if (!acc) {
      acc = w;
      return std::nullopt;
    }
    if (!(*acc == *w))
      return WeightReport{WeightStatus::Mixed, std::nullopt,
                          "mixed weights " + acc->str() + " and " + w->str() + " (term " +
                              to_string(term) + ")"};
    return std::nullopt;
  };
  if (x->kind == Kind::Sum) {
    for (const auto& term : x->children)
      if (auto bad = consider(term)) return *bad;
  } else {
    if (auto bad = consider(x)) return *bad;
  }
  if (!acc) return {WeightStatus::Uniform, Weight{}, "zero expression (weight by convention)"};
  return {WeightStatus::Uniform, acc, ""};
}

// --- exponent-pair classification -------------------------------------------

enum class Criticality { Subcritical, Critical, Supercritical };

inline const char* to_cstring(Criticality c) {
  switch (c) {
    case Criticality::Subcritical: return "subcritical";
    case Criticality::Critical: return "critical";
    case Criticality::Supercritical: return "supercritical";
  }
  return "?";
}

struct CriticalityReport {
  Rational ax, at;
  Rational energy_exponent;    // 5*ax - 2*at: kinetic-energy scaling exponent
  Rational velocity_exponent;  // ax - at: velocity scaling exponent
  Criticality verdict;         // 5/2 law: subcritical iff at > (5/2)*ax
  Criticality severity;        // |ax - at| vs (3/2)|ax| (reported alongside)
  std::optional<Rational> ratio;  // |at/ax| when ax*at < 0 (informational)
  std::optional<Criticality> ratio_verdict;  // ratio vs 1/2 (informational)
};

inline CriticalityReport classify_exponents(const Rational& ax, const Rational& at) {
  if (ax.is_zero() && at.is_zero())
    throw std::invalid_argument("exponent pair (0, 0) is the identity scaling");
  CriticalityReport r{ax, at, Rational(5) * ax - Rational(2) * at, ax - at,
                      Criticality::Critical, Criticality::Critical, std::nullopt,
                      std::nullopt};
  Rational margin = at - Rational(5, 2) * ax;  // = -energy_exponent / 2
  r.verdict = margin.sign() > 0   ? Criticality::Subcritical
              : margin.sign() < 0 ? Criticality::Supercritical
                                  : Criticality::Critical;
  Rational sev = (ax - at).abs() - Rational(3, 2) * ax.abs();
  r.severity = sev.sign() > 0   ? Criticality::Subcritical
               : sev.sign() < 0 ? Criticality::Supercritical
                                : Criticality::Critical;
  if (!ax.is_zero() && (ax * at).sign() < 0) {
    Rational q = (at / ax).abs();
    r.ratio = q;
    Rational d = q - Rational(1, 2);
    r.ratio_verdict = d.sign() > 0   ? Criticality::Subcritical
                      : d.sign() < 0 ? Criticality::Supercritical
                                     : Criticality::Critical;
  }
  return r;
}

// Scenario numbering over the sign of at and the 5/2-law verdict:
//   at > 0: 1 subcritical, 2 critical, 3 supercritical
//   at < 0: 4 subcritical, 5 critical, 6 supercritical
// Not applicable when ax = 0 or at = 0 (scenario 0). A finite-time blow-up
// needs at > 0, so scenario 4 excludes blow-up entirely. Smoothness of the
// self-similar data at t = 0 requires both (ax-at)/at > 0 and (ax-at)/ax > 0.
struct ScenarioReport {
  bool applicable = false;
  int scenario = 0;  // 1..6; 0 = not applicable
  Criticality verdict = Criticality::Critical;
  bool blowup_excluded = false;
  bool smooth_at_zero_possible = false;
};

inline ScenarioReport smoothness_scenario(const Rational& ax, const Rational& at) {
  ScenarioReport r;
  CriticalityReport c = classify_exponents(ax, at);
  r.verdict = c.verdict;
  if (ax.is_zero() || at.is_zero()) return r;
  r.applicable = true;
  int off = c.verdict == Criticality::Subcritical ? 1
            : c.verdict == Criticality::Critical  ? 2
                                                  : 3;
  r.scenario = at.sign() > 0 ? off : off + 3;
  r.blowup_excluded = (r.scenario == 4);
  Rational d = ax - at;
  r.smooth_at_zero_possible = (d / at).sign() > 0 && (d / ax).sign() > 0;
  return r;
}

}  // namespace bouton
