// Numeric evaluation, domain guards, deterministic sampling, and the
// structural/probabilistic zero test.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bouton/evaluate.hpp"
#include "test_support.hpp"

using namespace bouton;
using namespace bouton::testing;

TEST_CASE("evaluation of closed-form expressions", "[eval]") {
  Expr x = vx(), y = vy();
  EvalEnv env;
  env.values = {{SYM_X, 3.0}, {SYM_Y, -2.0}};
  CHECK(eval(x * x + y, env).value == Catch::Approx(7.0));
  CHECK(eval(x / y, env).value == Catch::Approx(-1.5));
  CHECK(eval(pw(x, Rational(-2)), env).value == Catch::Approx(1.0 / 9.0));
  env.values[SYM_X] = 2.0;
  CHECK(eval(sqrt_e(x), env).value == Catch::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(eval(x + vz(), env), eval_error);  // z unbound
}

TEST_CASE("max intermediate magnitude is tracked through cancellation", "[eval]") {
  // (y + 10^6) x - 10^6 x - x y cancels numerically but not structurally.
  Expr x = vx(), y = vy();
  Expr big = num(Rational(1000000));
  Expr e = (y + big) * x - big * x - x * y;
  REQUIRE(e->kind == Kind::Sum);
  EvalEnv env;
  env.values = {{SYM_X, 1.0}, {SYM_Y, 1.0}};
  EvalOut r = eval(e, env);
  CHECK(std::abs(r.value) < 1e-6);
  CHECK(r.maxmag > 9.0e5);  // the cancellation scale is visible to callers
}

TEST_CASE("domain guards reject near-singular points", "[eval]") {
  Expr x = vx();
  EvalEnv env;
  env.values[SYM_X] = 1e-8;
  CHECK_THROWS_AS(eval(num(Rational(1)) / x, env), eval_domain_error);
  env.values[SYM_X] = -1.0;
  CHECK_THROWS_AS(eval(sqrt_e(x), env), eval_domain_error);
  env.values[SYM_X] = 1e-8;
  CHECK_THROWS_AS(eval(sqrt_e(x), env), eval_domain_error);  // below the guard
  // Non-finite results are domain errors too.
  env.values[SYM_X] = 1e100;
  CHECK_THROWS_AS(eval(pw(x, Rational(8)), env), eval_domain_error);
}

TEST_CASE("calls evaluate through instantiations with a derivative cache", "[eval]") {
  Expr x = vx();
  SymbolId fa = intern_symbol("@a1", SymbolKind::Formal);
  Expr a = symbol(fa);
  CallDefs defs{{"F", {{fa}, a * a * a}}};
  std::map<std::pair<std::string, std::vector<int>>, Expr> dcache;
  EvalEnv env{{{SYM_X, 2.0}}, &defs, &dcache};
  CHECK(eval(call("F", {x}), env).value == Catch::Approx(8.0));
  // D[1]F = 3 a^2 evaluated at a = x^2 = 4.
  CHECK(eval(dcall("F", {1}, {x * x}), env).value == Catch::Approx(48.0));
  CHECK(dcache.size() == 2);
  CHECK(eval(dcall("F", {1}, {x * x}), env).value == Catch::Approx(48.0));
  CHECK(dcache.size() == 2);  // second evaluation hits the cache
  EvalEnv bare{{{SYM_X, 2.0}}, nullptr, nullptr};
  CHECK_THROWS_AS(eval(call("F", {x}), bare), eval_error);
  CHECK_THROWS_AS(eval(call("F", {x, x}), env), eval_error);  // arity mismatch
}

TEST_CASE("sample points respect sign conventions and linkage", "[eval]") {
  std::mt19937_64 rng(99);
  std::set<SymbolId> syms{SYM_X, SYM_T, SYM_P, SYM_NU, SYM_TAU, SYM_U,
                          SYM_COS_THETA, SYM_SIN_THETA, generated_formal(0)};
  bool saw_negative_x = false, saw_negative_u = false;
  for (int i = 0; i < 50; ++i) {
    auto pt = sample_point(syms, rng);
    CHECK_FALSE(pt.count(generated_formal(0)));  // formals are never sampled
    for (SymbolId id : {SYM_T, SYM_P, SYM_NU, SYM_TAU}) {
      CHECK(pt.at(id) >= 0.5);
      CHECK(pt.at(id) <= 2.0);
    }
    CHECK(std::abs(pt.at(SYM_X)) >= 0.5);
    CHECK(std::abs(pt.at(SYM_X)) <= 2.0);
    double c = pt.at(SYM_COS_THETA), s = pt.at(SYM_SIN_THETA);
    CHECK(c * c + s * s == Catch::Approx(1.0));
    CHECK(s > 0.0);  // angles stay in a fixed positive window
    saw_negative_x |= pt.at(SYM_X) < 0;
    saw_negative_u |= pt.at(SYM_U) < 0;
  }
  CHECK(saw_negative_x);
  CHECK(saw_negative_u);
}

TEST_CASE("zero test: structural, probabilistic, and nonzero verdicts", "[eval]") {
  Expr x = vx(), y = vy();
  Expr zero_id = (x + y) * (x + y) - x * x - num(Rational(2)) * x * y - y * y;
  CHECK(is_zero(zero_id).verdict == ZeroResult::Verdict::ZeroStructural);

  ZeroOptions skip;
  skip.skip_structural = true;
  CHECK(is_zero(zero_id, skip).verdict == ZeroResult::Verdict::ZeroProbabilistic);

  ZeroResult nz = is_zero(x * y - num(Rational(1)));
  CHECK(nz.verdict == ZeroResult::Verdict::NonZero);
  REQUIRE(nz.witness.has_value());
  CHECK(std::abs(nz.witness->value) > 1e-9 * nz.witness->scale);

  ZeroOptions structural_only;
  structural_only.structural_only = true;
  CHECK(is_zero(x * y - num(Rational(1)), structural_only).verdict ==
        ZeroResult::Verdict::Undetermined);
}

TEST_CASE("zero test clears sum denominators", "[eval]") {
  Expr x = vx(), y = vy();
  // 1/(x+y) - (x-y)/(x^2-y^2) vanishes identically off the singular set.
  Expr e = num(Rational(1)) / (x + y) - (x - y) / (x * x - y * y);
  CHECK(is_zero(e).verdict == ZeroResult::Verdict::ZeroStructural);
}

TEST_CASE("zero test handles opaque calls via generated instantiations", "[eval]") {
  Expr x = vx();
  Expr g = call("G", {x});
  Expr e = (g + num(Rational(1))) * (g + num(Rational(1))) - g * g -
           num(Rational(2)) * g - num(Rational(1));
  CHECK(is_zero(e).verdict == ZeroResult::Verdict::ZeroStructural);
  ZeroOptions skip;
  skip.skip_structural = true;
  CHECK(is_zero(e, skip).verdict == ZeroResult::Verdict::ZeroProbabilistic);
  // The generated instantiation is genuinely nonconstant.
  CHECK(is_zero(g - call("G", {x + num(Rational(1))})).verdict ==
        ZeroResult::Verdict::NonZero);
  // A registered instantiation takes precedence over a generated one.
  SymbolId fa = intern_symbol("@a1", SymbolKind::Formal);
  CallDefs defs{{"G", {{fa}, num(Rational(5))}}};
  ZeroOptions with_defs;
  with_defs.defs = &defs;
  with_defs.skip_structural = true;
  CHECK(is_zero(g - num(Rational(5)), with_defs).verdict ==
        ZeroResult::Verdict::ZeroProbabilistic);
}

TEST_CASE("linked angle symbols satisfy the circle identity", "[eval]") {
  Expr c = symbol(SYM_COS_THETA), s = symbol(SYM_SIN_THETA);
  Expr e = c * c + s * s - num(Rational(1));
  // Power reduction proves this structurally; sampling confirms the linkage.
  CHECK(is_zero(e).verdict == ZeroResult::Verdict::ZeroStructural);
  ZeroOptions skip;
  skip.skip_structural = true;
  CHECK(is_zero(e, skip).verdict == ZeroResult::Verdict::ZeroProbabilistic);
  CHECK(is_zero(c * c - s * s, skip).verdict == ZeroResult::Verdict::NonZero);
}

TEST_CASE("equivalence helper and determinism", "[eval]") {
  Expr x = vx(), t = vt();
  CHECK(equivalent(sqrt_e(t) * sqrt_e(t), t).is_zero());
  ZeroResult a = is_zero(x * t - num(Rational(1)));
  ZeroResult b = is_zero(x * t - num(Rational(1)));
  REQUIRE(a.witness.has_value());
  REQUIRE(b.witness.has_value());
  CHECK(a.witness->value == b.witness->value);  // same seed, same witness
  CHECK(a.witness->point == b.witness->point);
}
