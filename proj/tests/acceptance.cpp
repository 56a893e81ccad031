// Acceptance runner: exercises the end-to-end guarantees of the workbench and
// prints one [PASS]/[FAIL] line per criterion.  Exits nonzero if any fails.

#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bouton/cli.hpp"
#include "bouton/properties.hpp"

namespace {

using namespace bouton;

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

bool structurally_zero(const Expr& e) {
  ZeroOptions z;
  z.structural_only = true;
  return is_zero(e, z).verdict == ZeroResult::Verdict::ZeroStructural;
}

// --- 1. degree-0 invariant, structural plus sampled ---------------------------

std::string check_scalar_invariant() {
  std::vector<std::string> bad;

  std::ostringstream cli_out;
  int rc = run_cli({"verify-form", "--k", "0", "--json"}, cli_out);
  if (rc != 0) bad.push_back("verify-form --k 0 exited with code " + std::to_string(rc));
  auto doc = nlohmann::json::parse(cli_out.str(), nullptr, false);
  if (doc.is_discarded() || doc.value("verified", false) != true ||
      doc.value("structural", false) != true || doc.value("generators", 0) != 5)
    bad.push_back("verify-form --k 0 did not report 5 structural generator checks");

  ZeroOptions sampled;
  sampled.skip_structural = true;
  sampled.points = 100;
  sampled.tol = 1e-12;
  sampled.seed = 12345;
  ConservedReport rep = verify_conserved(catalog_form(0), sampled);
  for (const GeneratorCheck& gc : rep.checks)
    if (!gc.result.zero)
      bad.push_back("sampled residual above 1e-12 along " + gc.generator);
  return join(bad);
}

// --- 2. conserved-form catalog ------------------------------------------------

std::string check_catalog() {
  std::vector<std::string> bad;

  for (int k : {3, 5, 8}) {
    ZeroOptions z;
    z.tol = 1e-9;
    z.points = 100;
    ConservedReport rep = verify_conserved(catalog_form(k), z);
    if (!rep.all_zero)
      bad.push_back("degree-" + std::to_string(k) + " catalog form failed a check");
  }

  const struct {
    int k;
    std::size_t terms;
  } discrepant[] = {{2, 10}, {4, 18}, {6, 10}};
  for (const auto& d : discrepant) {
    std::string deg = "degree-" + std::to_string(d.k);
    if (catalog_term_count(d.k, CatalogVariant::Corrected) != d.terms)
      bad.push_back(deg + " corrected form does not have " +
                    std::to_string(d.terms) + " terms");

    ConservedReport vrep =
        verify_conserved(catalog_form(d.k, CatalogVariant::Verbatim), {});
    if (vrep.all_zero) {
      bad.push_back(deg + " published form unexpectedly verified");
    } else {
      std::set<std::string> failing;
      for (const GeneratorCheck& gc : vrep.checks)
        if (!gc.result.zero) {
          failing.insert(gc.generator);
          if (!gc.result.failing_mask || !gc.result.witness)
            bad.push_back(deg + " failing check along " + gc.generator +
                          " lacks a term/witness report");
        }
      if (failing != std::set<std::string>{"Rx", "Ry", "Rz"})
        bad.push_back(deg + " published form fails outside the rotations");
    }

    NullspaceResult ns = solve_forms(d.k);
    CatalogComparison cmp = compare_with_catalog(ns, CatalogVariant::Verbatim);
    if (!cmp.arbitrated)
      bad.push_back(deg + " solver comparison is not arbitrated");
    if (!(cmp.masked_distance < 1e-6)) {
      std::ostringstream os;
      os << deg << " masked projection distance " << cmp.masked_distance;
      bad.push_back(os.str());
    }
  }
  return join(bad);
}

// --- 3. degrees with no conserved forms ---------------------------------------

std::string check_empty_degrees() {
  std::vector<std::string> bad;
  for (int k : {1, 7}) {
    NullspaceResult ns = solve_forms(k);
    if (ns.dim() != 0)
      bad.push_back("degree " + std::to_string(k) + " nullspace has dimension " +
                    std::to_string(ns.dim()));
    if (!(ns.gap_ratio >= 1e3)) {
      std::ostringstream os;
      os << "degree " << k << " singular-value gap " << ns.gap_ratio << " < 1e3";
      bad.push_back(os.str());
    }
  }
  return join(bad);
}

// --- 4. criticality classification --------------------------------------------

std::string check_criticality() {
  std::vector<std::string> bad;
  auto expect = [&](long axn, long axd, long atn, long atd, Criticality verdict,
                    long en, long ed, int scenario, bool blowup_excluded,
                    int smooth) {  // smooth: 1 required, 0 forbidden, -1 ignore
    Rational ax(axn, axd), at(atn, atd);
    std::string tag = "(" + ax.str() + ", " + at.str() + ")";
    CriticalityReport r = classify_exponents(ax, at);
    ScenarioReport s = smoothness_scenario(ax, at);
    if (r.verdict != verdict) bad.push_back(tag + " wrong verdict");
    if (!(r.energy_exponent == Rational(en, ed)))
      bad.push_back(tag + " energy exponent " + r.energy_exponent.str());
    if (!(r.velocity_exponent == ax - at))
      bad.push_back(tag + " velocity exponent " + r.velocity_exponent.str());
    if (s.scenario != scenario)
      bad.push_back(tag + " scenario " + std::to_string(s.scenario));
    if (s.blowup_excluded != blowup_excluded)
      bad.push_back(tag + " blow-up exclusion flag wrong");
    if (smooth >= 0 && s.smooth_at_zero_possible != (smooth == 1))
      bad.push_back(tag + " smooth-data-at-zero flag wrong");
  };
  expect(1, 1, 2, 1, Criticality::Supercritical, 1, 1, 3, false, 0);
  expect(2, 1, 5, 1, Criticality::Critical, 0, 1, 2, false, -1);
  expect(0, 1, 1, 1, Criticality::Subcritical, -2, 1, 0, false, -1);
  expect(-20, 1, -40, 1, Criticality::Subcritical, -20, 1, 4, true, -1);
  expect(3, 1, 1, 1, Criticality::Supercritical, 13, 1, 3, false, 1);
  return join(bad);
}

// --- 5. isobaric scaling ansatz -----------------------------------------------

std::string check_isobaric_ansatz() {
  std::vector<std::string> bad;
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> numer(-4, 4), denom(1, 3);
  for (int trial = 0; trial < 5; ++trial) {
    Rational ax(numer(rng), denom(rng));
    Rational at(0, 1);
    do {
      at = Rational(numer(rng), denom(rng));
    } while (at.sign() == 0);
    std::string tag = "(" + ax.str() + ", " + at.str() + ")";

    SolutionFields f = self_similar_ansatz(ax, at);
    IsobaricityReport rep =
        verify_isobaricity(f, ax, at, IsobaricityMode::Combined);
    if (!rep.all_zero || !rep.structural)
      bad.push_back(tag + " scaling relations not structurally zero");

    Rational vel = ax - at, press = Rational(2, 1) * vel;
    for (const Expr* field : {&f.u, &f.v, &f.w}) {
      CovarianceReport c = covariance_factor(*field, ax, at);
      if (!c.exponent || !(*c.exponent == vel))
        bad.push_back(tag + " velocity covariance exponent wrong");
    }
    CovarianceReport cp = covariance_factor(f.p, ax, at);
    if (!cp.exponent || !(*cp.exponent == press))
      bad.push_back(tag + " pressure covariance exponent wrong");
  }

  SolutionFields cls = classical_ansatz(expr_zero());
  IsobaricityReport crep = verify_isobaricity(cls, Rational(1, 1), Rational(1, 1),
                                              IsobaricityMode::Split);
  if (!crep.all_zero || !crep.structural)
    bad.push_back("classical family relations not structurally zero");
  return join(bad);
}

// --- 6. stagnation-point solution ---------------------------------------------

std::string check_stagnation() {
  std::vector<std::string> bad;
  SolutionFields f = stagnation_solution();
  NSEResidual res = nse_residual(f);
  const Expr* comps[] = {&res.mom_x, &res.mom_y, &res.mom_z, &res.cont};
  const char* names[] = {"momentum-x", "momentum-y", "momentum-z", "continuity"};
  for (int i = 0; i < 4; ++i)
    if (!structurally_zero(*comps[i]))
      bad.push_back(std::string(names[i]) + " residual not structurally zero");

  Expr x = symbol(SYM_X), y = symbol(SYM_Y);
  Expr target = -(y * y) / (x * x + y * y);
  Expr en = euler_number(f);
  if (!structurally_zero(en - target))
    bad.push_back("Euler number differs from -y^2/(x^2+y^2)");
  if (!structurally_zero(differentiate(en, SYM_T)))
    bad.push_back("Euler number is not time-independent");

  for (const FiniteTransform& ft : {time_translation(), rotation_z()}) {
    SolutionFields g = transform_solution(ft, f);
    NSEResidual gres = nse_residual(g);
    ZeroOptions z;
    z.tol = 1e-10;
    z.seed = 12345;
    const Expr* gc[] = {&gres.mom_x, &gres.mom_y, &gres.mom_z, &gres.cont};
    for (int i = 0; i < 4; ++i)
      if (!is_zero(*gc[i], z).is_zero())
        bad.push_back(ft.name + " variant " + names[i] + " residual nonzero");
  }
  return join(bad);
}

// --- 7. joint scaling invariants ----------------------------------------------

std::string check_invariant_arguments() {
  std::vector<std::string> bad;
  ScalingInvariants inv = invariant_arguments();
  std::set<std::string> got(inv.labels.begin(), inv.labels.end());
  std::set<std::string> want = {"y/x",      "z/x",      "t*u/x",     "t*v/x",
                                "t*w/x",    "t*nu/x^2", "t^2*p/x^2"};
  if (got != want) bad.push_back("recovered invariant set differs (got " +
                                 std::to_string(got.size()) + " labels)");
  const VectorField* x1 = find_generator("X1");
  const VectorField* x2 = find_generator("X2");
  if (!x1 || !x2) return "scaling generators unavailable";
  for (std::size_t i = 0; i < inv.invariants.size(); ++i) {
    if (!structurally_zero(apply_generator(*x1, inv.invariants[i])))
      bad.push_back(inv.labels[i] + " not annihilated by X1");
    if (!structurally_zero(apply_generator(*x2, inv.invariants[i])))
      bad.push_back(inv.labels[i] + " not annihilated by X2");
  }
  return join(bad);
}

// --- 8. structural property suites --------------------------------------------

std::string check_property_suites() {
  std::vector<std::string> bad;
  std::vector<PropertySuiteResult> suites = run_property_suites(12345);
  auto trials = [&](const std::string& suite, const std::string& check) -> int {
    for (const PropertySuiteResult& s : suites)
      if (s.suite == suite)
        for (const PropertyCheck& c : s.checks)
          if (c.name == check) return c.trials;
    return -1;
  };
  for (const PropertySuiteResult& s : suites)
    if (!s.passed) bad.push_back("suite " + s.suite + " failed");
  const struct {
    const char* suite;
    const char* check;
    int trials;
  } pins[] = {
      {"d-squared", "d(d(form)) vanishes structurally", 200},
      {"cartan-vs-flow", "relative error < 1e-3 at eps = 1e-4", 40},
      {"leibniz", "L(f ^ g) = L(f) ^ g + f ^ L(g)", 100},
      {"weights", "weight(m1*m2) = weight(m1) + weight(m2)", 100},
      {"weights", "covariance exponent equals the realized weight", 500},
      {"derivative-fd", "d/dx matches a central difference (rel tol 1e-6)", 100},
  };
  for (const auto& p : pins)
    if (trials(p.suite, p.check) != p.trials)
      bad.push_back(std::string(p.suite) + " ran " +
                    std::to_string(trials(p.suite, p.check)) + " trials for '" +
                    p.check + "', expected " + std::to_string(p.trials));
  return join(bad);
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    long budget_ms;
    std::function<std::string()> run;
  };
  const Criterion criteria[] = {
      {"scalar-invariant-form", 1000, check_scalar_invariant},
      {"conserved-form-catalog", 300000, check_catalog},
      {"empty-degrees", 120000, check_empty_degrees},
      {"criticality-classification", 1000, check_criticality},
      {"isobaric-scaling-ansatz", 10000, check_isobaric_ansatz},
      {"stagnation-exact-solution", 5000, check_stagnation},
      {"scaling-invariant-arguments", 30000, check_invariant_arguments},
      {"structural-property-suites", 120000, check_property_suites},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    try {
      detail = c.run();
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    if (detail.empty() && ms > c.budget_ms)
      detail = "exceeded time budget (" + std::to_string(ms) + " ms > " +
               std::to_string(c.budget_ms) + " ms)";
    if (detail.empty()) {
      std::cout << "[PASS] " << c.name << " (" << ms << " ms)\n";
    } else {
      std::cout << "[FAIL] " << c.name << " (" << ms << " ms): " << detail << "\n";
      ++failed;
    }
  }
  int total = static_cast<int>(std::size(criteria));
  std::cout << (total - failed) << "/" << total << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
