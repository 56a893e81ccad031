// Exact differentiation, substitution, and call expansion.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bouton/calculus.hpp"
#include "bouton/evaluate.hpp"
#include "bouton/printer.hpp"
#include "test_support.hpp"

using namespace bouton;
using namespace bouton::testing;

TEST_CASE("derivatives of polynomials and powers", "[calculus]") {
  Expr x = vx(), y = vy(), t = vt();
  CHECK(equal(differentiate(num(Rational(7)), SYM_X), expr_zero()));
  CHECK(equal(differentiate(x, SYM_X), expr_one()));
  CHECK(equal(differentiate(x, SYM_Y), expr_zero()));
  CHECK(equal(differentiate(x * x * x, SYM_X), num(Rational(3)) * x * x));
  CHECK(equal(differentiate(x * y + y * t, SYM_Y), x + t));
  // d/dx x^(-2) = -2 x^(-3)
  CHECK(equal(differentiate(pw(x, Rational(-2)), SYM_X),
              num(Rational(-2)) * pw(x, Rational(-3))));
  // d/dt sqrt(t) = (1/2) t^(-1/2)
  CHECK(equal(differentiate(sqrt_e(t), SYM_T),
              num(Rational(1, 2)) * pw(t, Rational(-1, 2))));
}

TEST_CASE("product and quotient rules", "[calculus]") {
  Expr x = vx(), u = vu(), v = vv();
  Expr q = u / v;
  Expr dq = differentiate(q, SYM_V);
  CHECK(is_zero(dq + u / (v * v)).is_zero());
  Expr triple = x * u * v;
  CHECK(equal(differentiate(triple, SYM_U), x * v));
  // Chain through a composite power: d/dx (x^2 + u^2)^(3/2) = 3x sqrt(x^2+u^2)
  Expr r = pw(x * x + u * u, Rational(3, 2));
  Expr dr = differentiate(r, SYM_X);
  CHECK(is_zero(dr - num(Rational(3)) * x * sqrt_e(x * x + u * u)).is_zero());
}

TEST_CASE("call derivatives track per-argument orders", "[calculus]") {
  Expr x = vx(), t = vt();
  Expr f = call("F", {x * x, t});
  Expr dfx = differentiate(f, SYM_X);
  REQUIRE(dfx->kind == Kind::Product);
  CHECK(equal(dfx, num(Rational(2)) * x * dcall("F", {1, 0}, {x * x, t})));
  // Mixed partials commute through the orders bookkeeping.
  Expr g = call("F", {x, t});
  CHECK(equal(differentiate(differentiate(g, SYM_X), SYM_T),
              differentiate(differentiate(g, SYM_T), SYM_X)));
  CHECK(equal(differentiate(g, SYM_X, 2), dcall("F", {2, 0}, {x, t})));
  // An argument independent of the variable contributes nothing.
  CHECK(equal(differentiate(call("F", {t, t}), SYM_X), expr_zero()));
}

TEST_CASE("derivative matches finite differences on random expressions", "[calculus]") {
  std::mt19937_64 rng(4200);
  GenOptions opt;
  opt.max_depth = 3;
  int tested = 0;
  for (int it = 0; it < 400 && tested < 30; ++it) {
    Expr e = gen_expr(rng, opt);
    if (!depends_on(e, SYM_X)) continue;
    Expr de = differentiate(e, SYM_X);
    auto syms = free_symbols(e);
    syms.insert(SYM_X);
    bool done = false;
    for (int attempt = 0; attempt < 100 && !done; ++attempt) {
      auto point = sample_point(syms, rng);
      EvalEnv env{point, nullptr, nullptr};
      try {
        double exact = eval(de, env).value;
        const double h = 1e-5;
        EvalEnv ep = env, em = env;
        ep.values[SYM_X] += h;
        em.values[SYM_X] -= h;
        double fd = (eval(e, ep).value - eval(e, em).value) / (2 * h);
        double scale = 1.0 + std::abs(exact) + std::abs(fd);
        CHECK(std::abs(exact - fd) < 1e-5 * scale);
        done = true;
      } catch (const eval_domain_error&) {
        // resample
      }
    }
    if (done) ++tested;
  }
  CHECK(tested == 30);
}

TEST_CASE("substitution is simultaneous and renormalizing", "[calculus]") {
  Expr x = vx(), y = vy(), t = vt(), u = vu();
  // Swapping x and y must not cascade.
  std::map<SymbolId, Expr> swap{{SYM_X, y}, {SYM_Y, x}};
  CHECK(equal(substitute(x / y, swap), y / x));
  CHECK(equal(substitute(x + y, swap), x + y));
  // t -> 0 collapses terms.
  CHECK(equal(substitute(t * x + u, SYM_T, expr_zero()), u));
  CHECK(equal(substitute(pw(t, Rational(2)) + t, SYM_T, expr_zero()), expr_zero()));
  // 0 raised to a negative power has no value.
  CHECK_THROWS_AS(substitute(x / t, SYM_T, expr_zero()), expr_error);
  CHECK_THROWS_AS(substitute(x / (t * t), SYM_T, expr_zero()), expr_error);
  // Substitution reaches call arguments.
  CHECK(equal(substitute(call("F", {t, x}), SYM_T, x), call("F", {x, x})));
}

TEST_CASE("substitute_calls expands known definitions", "[calculus]") {
  Expr x = vx(), t = vt();
  SymbolId fa = intern_symbol("@a1", SymbolKind::Formal);
  SymbolId fb = intern_symbol("@a2", SymbolKind::Formal);
  Expr a = symbol(fa), b = symbol(fb);
  // F(a, b) = a^2 b + b
  std::map<std::string, Instantiation> defs{{"F", {{fa, fb}, a * a * b + b}}};
  CHECK(equal(substitute_calls(call("F", {x, t}), defs), x * x * t + t));
  // First-slot derivative: dF/da = 2ab, bound at (x, t).
  CHECK(equal(substitute_calls(dcall("F", {1, 0}, {x, t}), defs),
              num(Rational(2)) * x * t));
  // Mixed second derivative: d2F/dadb = 2a.
  CHECK(equal(substitute_calls(dcall("F", {1, 1}, {x, t}), defs),
              num(Rational(2)) * x));
  // Unknown calls survive untouched; arity mismatches are errors.
  Expr g = dcall("G", {2}, {x});
  CHECK(equal(substitute_calls(g, defs), g));
  CHECK_THROWS_AS(substitute_calls(call("F", {x}), defs), expr_error);
}

TEST_CASE("expanding calls commutes with differentiation", "[calculus]") {
  // d/dx [F(x^2, t)] computed symbolically, then expanded, must agree with
  // expanding first and differentiating the closed form.
  Expr x = vx(), t = vt();
  SymbolId fa = intern_symbol("@a1", SymbolKind::Formal);
  SymbolId fb = intern_symbol("@a2", SymbolKind::Formal);
  Expr a = symbol(fa), b = symbol(fb);
  std::map<std::string, Instantiation> defs{
      {"F", {{fa, fb}, a * a * b + sqrt_e(num(Rational(1)) + a * a)}}};
  Expr f = call("F", {x * x, t});
  Expr lhs = substitute_calls(differentiate(f, SYM_X), defs);
  Expr rhs = differentiate(substitute_calls(f, defs), SYM_X);
  CHECK(is_zero(lhs - rhs).is_zero());
}
