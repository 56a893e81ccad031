#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "bouton/conserved.hpp"
#include "bouton/weights.hpp"
#include "test_support.hpp"

using namespace bouton;
using namespace bouton::testing;

namespace {

ZeroOptions fast_opts() {
  ZeroOptions opts;
  opts.points = 10;
  return opts;
}

}  // namespace

TEST_CASE("catalog degrees and raw term counts", "[conserved]") {
  CHECK(catalog_degrees() == std::vector<int>{0, 2, 3, 4, 5, 6, 8});

  const std::map<int, std::size_t> expected = {{0, 1}, {2, 10}, {3, 6},  {4, 18},
                                               {5, 6}, {6, 10}, {8, 1}};
  for (auto [k, n] : expected) {
    CHECK(catalog_term_count(k, CatalogVariant::Corrected) == n);
    // Verbatim keeps the same row counts even where rows repeat a tuple.
    CHECK(catalog_term_count(k, CatalogVariant::Verbatim) == n);
  }

  CHECK_THROWS_AS(catalog_terms(1, CatalogVariant::Corrected), form_error);
  CHECK_THROWS_AS(catalog_terms(7, CatalogVariant::Verbatim), form_error);
  CHECK_THROWS_AS(catalog_form(9), form_error);
}

TEST_CASE("building forms merges duplicated verbatim tuples", "[conserved]") {
  CHECK(catalog_form(6, CatalogVariant::Corrected).terms().size() == 10);
  // Three verbatim rows repeat the du/\dv tuple of the row above them, so the
  // built form has only 7 distinct slots.
  CHECK(catalog_form(6, CatalogVariant::Verbatim).terms().size() == 7);

  CHECK(catalog_form(2, CatalogVariant::Corrected).terms().size() == 10);
  CHECK(catalog_form(2, CatalogVariant::Verbatim).terms().size() == 10);
  CHECK(catalog_form(4, CatalogVariant::Corrected).terms().size() == 18);
  CHECK(catalog_form(4, CatalogVariant::Verbatim).terms().size() == 18);

  // Degrees 0, 3, 5, 8 have no defects: the variants agree slot by slot.
  for (int k : {0, 3, 5, 8}) {
    KForm diff = catalog_form(k, CatalogVariant::Corrected) -
                 catalog_form(k, CatalogVariant::Verbatim);
    CHECK(form_is_zero(diff, fast_opts()).structural);
  }
}

TEST_CASE("corrected catalog verifies along all five generators", "[conserved]") {
  for (int k : catalog_degrees()) {
    INFO("degree " << k);
    ConservedReport rep = verify_conserved(catalog_form(k), fast_opts());
    REQUIRE(rep.checks.size() == 5);
    CHECK(rep.checks[0].generator == "T");
    CHECK(rep.checks[1].generator == "X");
    CHECK(rep.checks[2].generator == "Rx");
    CHECK(rep.checks[3].generator == "Ry");
    CHECK(rep.checks[4].generator == "Rz");
    CHECK(rep.all_zero);
    // Every Lie derivative cancels exactly, not just numerically.
    CHECK(rep.structural);
  }
}

TEST_CASE("verbatim defects fail rotations with witnesses", "[conserved]") {
  for (int k : {2, 4, 6}) {
    INFO("degree " << k);
    ConservedReport rep =
        verify_conserved(catalog_form(k, CatalogVariant::Verbatim), fast_opts());
    CHECK_FALSE(rep.all_zero);

    std::set<std::string> failing;
    for (const GeneratorCheck& gc : rep.checks) {
      if (gc.result.zero) continue;
      failing.insert(gc.generator);
      // A failure names the offending slot and carries a numeric witness.
      REQUIRE(gc.result.failing_mask.has_value());
      CHECK(mask_degree(*gc.result.failing_mask) == k);
      REQUIRE(gc.result.witness.has_value());
      CHECK(std::abs(gc.result.witness->value) >
            1e-9 * std::max(1.0, gc.result.witness->scale));
    }
    // The defects respect the scaling structure, so T and X still pass;
    // only the rotations detect them.
    CHECK(failing == std::set<std::string>{"Rx", "Ry", "Rz"});
  }
}

TEST_CASE("catalog terms pair weight-balanced coefficients with tuples",
          "[conserved]") {
  const Rational ax(1), at(2);
  for (int k : catalog_degrees()) {
    for (const CatalogTerm& term : catalog_terms(k, CatalogVariant::Corrected)) {
      INFO("degree " << k << " coeff " << term.coeff);
      WeightReport wr = weight_of(detail::catalog_coefficient(term.coeff));
      REQUIRE(wr.status == WeightStatus::Uniform);
      // Coefficients are built from ratios of matching weight, so they are
      // weight-neutral on their own.
      CHECK(wr.weight->is_zero());

      Weight tuple_weight{};
      for (int b : mask_tuple(term.mask)) tuple_weight = tuple_weight + symbol_weight(b);
      Weight total = *wr.weight + tuple_weight;
      // The realized exponent under the reference scaling pair vanishes
      // term by term, although the weight itself is nonzero in degree > 0.
      CHECK(total.realized(ax, at) == Rational(0));
      if (k > 0) CHECK_FALSE(total.is_zero());
    }
  }
}

TEST_CASE("degree-zero invariants", "[conserved]") {
  // The catalog scalar is the pressure/speed^2 ratio.
  KForm b0 = catalog_form(0);
  Expr s2 = vu() * vu() + vv() * vv() + vw() * vw();
  CHECK(is_zero(b0.coefficient(0) - vp() / s2).verdict == ZeroResult::Verdict::ZeroStructural);

  // Constants are annihilated by every generator as well.
  ConservedReport ones = verify_conserved(KForm::scalar(expr_one()), fast_opts());
  CHECK(ones.all_zero);
  CHECK(ones.structural);
}
