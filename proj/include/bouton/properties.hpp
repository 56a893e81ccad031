#pragma once
// Randomized structural property suites shared by the unit tests, the
// acceptance runner, and the reproduce driver.  Each suite draws its own
// deterministic stream from the given seed, so results are reproducible.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bouton/calculus.hpp"
#include "bouton/evaluate.hpp"
#include "bouton/kform.hpp"
#include "bouton/symmetry.hpp"
#include "bouton/weights.hpp"

namespace bouton {

struct PropertyCheck {
  std::string name;
  bool passed = true;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::string note;  // details of the first failure, if any
};

struct PropertySuiteResult {
  std::string suite;
  bool passed = true;
  std::vector<PropertyCheck> checks;
};

namespace detail {

// Small random expressions over the core coordinates.  Polynomials by
// default; optionally guarded square roots of positive bases.
inline Expr random_property_expr(std::mt19937_64& rng, int depth, bool allow_sqrt) {
  static const std::array<SymbolId, 8> core = {SYM_X, SYM_Y, SYM_Z, SYM_T,
                                               SYM_U, SYM_V, SYM_W, SYM_P};
  auto leaf = [&]() -> Expr {
    std::uniform_int_distribution<int> pick(0, 9);
    int c = pick(rng);
    if (c < 8) return symbol(core[static_cast<std::size_t>(c) % core.size()]);
    std::uniform_int_distribution<int> val(1, 3);
    int n = val(rng), d = val(rng);
    return num(Rational(c == 9 ? -n : n, d));
  };
  if (depth <= 0) return leaf();
  std::uniform_int_distribution<int> pick(0, 9);
  int c = pick(rng);
  if (c <= 3) {
    Expr a = random_property_expr(rng, depth - 1, allow_sqrt);
    Expr b = random_property_expr(rng, depth - 1, allow_sqrt);
    return c <= 1 ? a + b : a - b;
  }
  if (c <= 6) {
    Expr a = random_property_expr(rng, depth - 1, allow_sqrt);
    Expr b = random_property_expr(rng, depth - 1, allow_sqrt);
    return a * b;
  }
  if (c == 7) {
    Expr a = random_property_expr(rng, depth - 1, allow_sqrt);
    std::uniform_int_distribution<int> e(2, 3);
    return pow_e(a, Rational(e(rng)));
  }
  if (c == 8 && allow_sqrt) {
    Expr a = random_property_expr(rng, depth - 1, false);
    return sqrt_e(num(1) + a * a);
  }
  return leaf();
}

inline KForm random_property_form(std::mt19937_64& rng, int degree, int max_terms,
                                  int depth) {
  KForm f(degree);
  std::uniform_int_distribution<int> nterms(1, max_terms);
  std::uniform_int_distribution<int> bit(0, 7);
  int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    Mask m = 0;
    while (mask_degree(m) < degree) m |= static_cast<Mask>(1u << bit(rng));
    f.add_term(m, random_property_expr(rng, depth, false));
  }
  return f;
}

inline void record(PropertyCheck& chk, bool ok, const std::string& note) {
  ++chk.trials;
  if (ok) return;
  ++chk.failures;
  if (chk.passed) chk.note = note;
  chk.passed = false;
}

inline void finish(PropertySuiteResult& r) {
  for (const PropertyCheck& c : r.checks) r.passed = r.passed && c.passed;
}

}  // namespace detail

// d(d(f)) vanishes identically for random forms of every degree.
inline PropertySuiteResult property_d_squared(std::uint64_t seed = 12345,
                                              int forms = 200) {
  PropertySuiteResult res{"d-squared"};
  PropertyCheck chk{"d(d(form)) vanishes structurally"};
  std::mt19937_64 rng(seed ^ 0xd5d5d5d5ull);
  ZeroOptions structural;
  structural.structural_only = true;
  for (int i = 0; i < forms; ++i) {
    std::uniform_int_distribution<int> deg(0, 6);
    KForm f = detail::random_property_form(rng, deg(rng), 3, 2);
    KForm dd = ext_d(ext_d(f));
    FormZeroCheck z = form_is_zero(dd, structural);
    detail::record(chk, dd.empty() || (z.zero && z.structural),
                   "degree " + std::to_string(f.degree()));
  }
  res.checks.push_back(chk);
  detail::finish(res);
  return res;
}

// The Lie derivative matches the first-order response of the finite
// transforms: with the scaling flow frozen at k = 1 + eps (exact rational
// eps = 1/10000) and the time translation at tau = eps,
//   (phi* f - f)/eps  =  L_V f + O(eps).
// The relative error at eps is small and halving eps halves it.  The leading
// truncation term for a monomial of realized weight c is eps * c(c-1)/2, so
// the population is kept to degree <= 2 coefficients and scaling pairs with
// small per-symbol weights; that bounds |c| well inside the regime where a
// first-order check at eps = 1e-4 can resolve against the 1e-3 tolerance.
inline PropertySuiteResult property_cartan_vs_flow(std::uint64_t seed = 12345,
                                                   int trials = 40) {
  PropertySuiteResult res{"cartan-vs-flow"};
  PropertyCheck err_chk{"relative error < 1e-3 at eps = 1e-4"};
  PropertyCheck order_chk{"halving eps halves the error"};
  std::mt19937_64 rng(seed ^ 0xca47a0ull);

  static const std::array<std::pair<int, int>, 4> pairs = {
      {{1, 2}, {2, 1}, {1, 0}, {0, 1}}};
  const Rational eps(1, 10000);

  static const std::array<SymbolId, 8> core = {SYM_X, SYM_Y, SYM_Z, SYM_T,
                                               SYM_U, SYM_V, SYM_W, SYM_P};
  auto small_coeff = [&rng]() {
    std::uniform_int_distribution<int> nterms(1, 2), nfac(1, 2), pick(0, 7),
        val(-3, 3);
    Expr sum = expr_zero();
    int nt = nterms(rng);
    for (int t = 0; t < nt; ++t) {
      int c = val(rng);
      if (c == 0) c = 1;
      Expr m = num(c);
      int nf = nfac(rng);
      for (int j = 0; j < nf; ++j)
        m = m * symbol(core[static_cast<std::size_t>(pick(rng))]);
      sum = sum + m;
    }
    return sum;
  };

  for (int i = 0; i < trials; ++i) {
    std::uniform_int_distribution<int> deg(0, 3), nterms(1, 2), bit(0, 7),
        pickt(0, 4);
    int degree = deg(rng);
    KForm f(degree);
    int nt = nterms(rng);
    for (int t = 0; t < nt; ++t) {
      Mask m = 0;
      while (mask_degree(m) < degree) m |= static_cast<Mask>(1u << bit(rng));
      f.add_term(m, small_coeff());
    }

    int tsel = pickt(rng);
    VectorField v;
    FiniteTransform ft{"", {}};
    SymbolId knob = SYM_K;
    if (tsel < 4) {
      Rational ax(pairs[static_cast<std::size_t>(tsel)].first);
      Rational at(pairs[static_cast<std::size_t>(tsel)].second);
      v = scale_generator(ax, at);
      ft = finite_scaling(ax, at);
      knob = SYM_K;
    } else {
      v = gen_T();
      ft = time_translation();
      knob = SYM_TAU;
    }
    KForm lie = lie_derivative(v, f);
    KForm moved = ft.apply(f);

    auto fd_form = [&](const Rational& e) {
      Expr value = (knob == SYM_K) ? num(Rational(1) + e) : num(e);
      KForm at_eps(moved.degree());
      for (const auto& [mask, coeff] : moved.terms())
        at_eps.add_term(mask, substitute(coeff, knob, value));
      return num(Rational(1) / e) * (at_eps - f);
    };
    KForm fd1 = fd_form(eps);
    KForm fd2 = fd_form(eps / Rational(2));

    // Shared sample points: both difference quotients and the Lie derivative
    // are evaluated at the same coordinates so the two errors are comparable.
    std::set<SymbolId> syms;
    for (const KForm* fp : {&fd1, &fd2, &lie})
      for (const auto& [mask, coeff] : fp->terms()) {
        std::set<SymbolId> s = free_symbols(coeff);
        syms.insert(s.begin(), s.end());
      }
    double err1 = 0.0, err2 = 0.0, scale = 1.0;
    for (int pt = 0; pt < 4; ++pt) {
      EvalEnv env;
      env.values = sample_point(syms, rng);
      auto coeff_at = [&](const KForm& fp, Mask m) {
        return eval(fp.coefficient(m), env).value;
      };
      std::set<Mask, MaskLess> masks;
      for (const KForm* fp : {&fd1, &fd2, &lie})
        for (const auto& [mask, coeff] : fp->terms()) masks.insert(mask);
      for (Mask m : masks) {
        double lv = coeff_at(lie, m);
        err1 = std::max(err1, std::abs(coeff_at(fd1, m) - lv));
        err2 = std::max(err2, std::abs(coeff_at(fd2, m) - lv));
        scale = std::max(scale, std::abs(lv));
      }
    }
    detail::record(err_chk, err1 < 1e-3 * scale,
                   "trial " + std::to_string(i) + ": rel err " +
                       std::to_string(err1 / scale));
    double floor = 1e-9 * scale;
    if (err1 > floor && err2 > floor) {
      double ratio = err1 / err2;
      detail::record(order_chk, ratio > 1.5 && ratio < 3.0,
                     "trial " + std::to_string(i) + ": ratio " +
                         std::to_string(ratio));
    } else {
      detail::record(order_chk, true, "");
    }
  }
  res.checks.push_back(err_chk);
  res.checks.push_back(order_chk);
  detail::finish(res);
  return res;
}

// L_V is a derivation over the wedge product.
inline PropertySuiteResult property_leibniz(std::uint64_t seed = 12345,
                                            int pairs = 100) {
  PropertySuiteResult res{"leibniz"};
  PropertyCheck chk{"L(f ^ g) = L(f) ^ g + f ^ L(g)"};
  std::mt19937_64 rng(seed ^ 0x1e1b1ull);
  const std::vector<VectorField>& gens = generator_catalog();
  for (int i = 0; i < pairs; ++i) {
    std::uniform_int_distribution<int> dega(0, 2), degb(0, 2),
        pickg(0, static_cast<int>(gens.size()) - 1);
    KForm f = detail::random_property_form(rng, dega(rng), 2, 1);
    KForm g = detail::random_property_form(rng, degb(rng), 2, 1);
    const VectorField& v = gens[static_cast<std::size_t>(pickg(rng))];
    KForm lhs = lie_derivative(v, wedge(f, g));
    KForm rhs = wedge(lie_derivative(v, f), g) + wedge(f, lie_derivative(v, g));
    FormZeroCheck z = form_is_zero(lhs - rhs);
    detail::record(chk, z.zero,
                   "generator " + v.name + ", degrees " +
                       std::to_string(f.degree()) + "," + std::to_string(g.degree()));
  }
  res.checks.push_back(chk);
  detail::finish(res);
  return res;
}

// Weights add under multiplication, and the weight of a monomial predicts its
// exact covariance factor under every finite scaling.
inline PropertySuiteResult property_weights(std::uint64_t seed = 12345,
                                            int monomials = 100) {
  PropertySuiteResult res{"weights"};
  PropertyCheck add_chk{"weight(m1*m2) = weight(m1) + weight(m2)"};
  PropertyCheck bridge_chk{"covariance exponent equals the realized weight"};
  std::mt19937_64 rng(seed ^ 0x3e163ull);

  static const std::array<SymbolId, 10> syms = {SYM_X, SYM_Y, SYM_Z, SYM_T, SYM_U,
                                                SYM_V, SYM_W, SYM_P, SYM_NU, SYM_TAU};
  static const std::array<std::pair<int, int>, 5> pairs = {
      {{1, 2}, {2, 5}, {3, 1}, {1, -1}, {-2, -1}}};

  auto random_monomial = [&rng]() {
    std::uniform_int_distribution<int> nfac(1, 4), pick(0, 9), expo(-2, 2);
    Expr m = num(1);
    int n = nfac(rng);
    for (int i = 0; i < n; ++i) {
      int e = expo(rng);
      if (e == 0) e = 1;
      m = m * pow_e(symbol(syms[static_cast<std::size_t>(pick(rng))]), Rational(e));
    }
    return m;
  };

  for (int i = 0; i < monomials; ++i) {
    Expr m1 = random_monomial(), m2 = random_monomial();
    WeightReport w1 = weight_of(m1), w2 = weight_of(m2), w12 = weight_of(m1 * m2);
    bool ok = w1.status == WeightStatus::Uniform &&
              w2.status == WeightStatus::Uniform &&
              w12.status == WeightStatus::Uniform &&
              (*w1.weight + *w2.weight) == *w12.weight;
    detail::record(add_chk, ok, to_string(m1) + " vs " + to_string(m2));

    for (const auto& [axi, ati] : pairs) {
      Rational ax(axi), at(ati);
      CovarianceReport cov = covariance_factor(m1, ax, at);
      bool bridge = (cov.status == CovarianceReport::Status::Covariant ||
                     cov.status == CovarianceReport::Status::Invariant) &&
                    cov.exponent && *cov.exponent == w1.weight->realized(ax, at);
      detail::record(bridge_chk, bridge,
                     to_string(m1) + " under (" + ax.str() + ", " + at.str() + ")");
    }
  }
  res.checks.push_back(add_chk);
  res.checks.push_back(bridge_chk);
  detail::finish(res);
  return res;
}

// Symbolic derivatives match central finite differences.
inline PropertySuiteResult property_derivative_fd(std::uint64_t seed = 12345,
                                                  int exprs = 100) {
  PropertySuiteResult res{"derivative-fd"};
  PropertyCheck chk{"d/dx matches a central difference (rel tol 1e-6)"};
  std::mt19937_64 rng(seed ^ 0xfd0fd0ull);

  int tested = 0, guard = 0;
  while (tested < exprs && guard < exprs * 30) {
    ++guard;
    Expr e = detail::random_property_expr(rng, 3, true);
    std::set<SymbolId> syms = free_symbols(e);
    std::vector<SymbolId> present(syms.begin(), syms.end());
    if (present.empty()) continue;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(present.size()) - 1);
    SymbolId var = present[static_cast<std::size_t>(pick(rng))];
    Expr de = differentiate(e, var);

    std::map<SymbolId, double> point = sample_point(syms, rng);
    const double h = 1e-5;
    auto value_at = [&](double shift) {
      EvalEnv env;
      env.values = point;
      env.values[var] = point[var] + shift;
      return eval(e, env);
    };
    try {
      EvalOut up = value_at(h), down = value_at(-h);
      EvalEnv env;
      env.values = point;
      EvalOut sym = eval(de, env);
      double fd = (up.value - down.value) / (2 * h);
      double scale = 1.0 + std::abs(sym.value) + std::abs(up.maxmag) * h;
      detail::record(chk, std::abs(fd - sym.value) <= 1e-6 * scale * 10,
                     to_string(e));
      ++tested;
    } catch (const eval_domain_error&) {
      continue;  // resample
    }
  }
  res.checks.push_back(chk);
  detail::finish(res);
  return res;
}

inline std::vector<PropertySuiteResult> run_property_suites(std::uint64_t seed = 12345) {
  return {property_d_squared(seed), property_cartan_vs_flow(seed),
          property_leibniz(seed), property_weights(seed),
          property_derivative_fd(seed)};
}

}  // namespace bouton
