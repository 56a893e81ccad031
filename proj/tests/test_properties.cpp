#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "bouton/properties.hpp"

using namespace bouton;

namespace {

const PropertyCheck& find_check(const PropertySuiteResult& r, const std::string& name) {
  for (const PropertyCheck& c : r.checks)
    if (c.name == name) return c;
  FAIL("missing check: " + name);
  return r.checks.front();
}

}  // namespace

TEST_CASE("exterior derivative squares to zero on random forms", "[properties]") {
  PropertySuiteResult r = property_d_squared(12345, 200);
  REQUIRE(r.checks.size() == 1);
  const PropertyCheck& c = r.checks.front();
  INFO(c.note);
  CHECK(c.trials == 200);
  CHECK(c.failures == 0);
  CHECK(r.passed);
}

TEST_CASE("lie derivative is the first-order response of the finite flows",
          "[properties]") {
  PropertySuiteResult r = property_cartan_vs_flow(12345, 40);
  const PropertyCheck& err = find_check(r, "relative error < 1e-3 at eps = 1e-4");
  const PropertyCheck& ord = find_check(r, "halving eps halves the error");
  INFO(err.note);
  CHECK(err.trials == 40);
  CHECK(err.failures == 0);
  INFO(ord.note);
  CHECK(ord.trials == 40);
  CHECK(ord.failures == 0);
  CHECK(r.passed);
}

TEST_CASE("lie derivative satisfies the Leibniz rule over wedge products",
          "[properties]") {
  PropertySuiteResult r = property_leibniz(12345, 100);
  REQUIRE(r.checks.size() == 1);
  const PropertyCheck& c = r.checks.front();
  INFO(c.note);
  CHECK(c.trials == 100);
  CHECK(c.failures == 0);
  CHECK(r.passed);
}

TEST_CASE("weights add and predict exact covariance exponents", "[properties]") {
  PropertySuiteResult r = property_weights(12345, 100);
  const PropertyCheck& add = find_check(r, "weight(m1*m2) = weight(m1) + weight(m2)");
  const PropertyCheck& bridge =
      find_check(r, "covariance exponent equals the realized weight");
  INFO(add.note);
  CHECK(add.trials == 100);
  CHECK(add.failures == 0);
  INFO(bridge.note);
  CHECK(bridge.trials == 500);  // 100 monomials x 5 scaling pairs
  CHECK(bridge.failures == 0);
  CHECK(r.passed);
}

TEST_CASE("symbolic derivatives match central finite differences", "[properties]") {
  PropertySuiteResult r = property_derivative_fd(12345, 100);
  REQUIRE(r.checks.size() == 1);
  const PropertyCheck& c = r.checks.front();
  INFO(c.note);
  CHECK(c.trials == 100);
  CHECK(c.failures == 0);
  CHECK(r.passed);
}

TEST_CASE("property runner aggregates all five suites", "[properties]") {
  std::vector<PropertySuiteResult> all = run_property_suites(12345);
  REQUIRE(all.size() == 5);
  CHECK(all[0].suite == "d-squared");
  CHECK(all[1].suite == "cartan-vs-flow");
  CHECK(all[2].suite == "leibniz");
  CHECK(all[3].suite == "weights");
  CHECK(all[4].suite == "derivative-fd");
  for (const PropertySuiteResult& r : all) {
    INFO(r.suite);
    CHECK(r.passed);
  }
}

TEST_CASE("property suites hold at other seeds", "[properties]") {
  for (std::uint64_t seed : {7ull, 99ull, 2026ull}) {
    for (const PropertySuiteResult& r : run_property_suites(seed)) {
      INFO("seed " << seed << ", suite " << r.suite);
      CHECK(r.passed);
    }
  }
}
