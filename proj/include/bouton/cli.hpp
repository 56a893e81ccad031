#pragma once
// Subcommand-style command line driving every library operation, with
// human-readable text by default and JSON (stdout or file) behind --json.
// run_cli is the in-process entry point; the binary's main() forwards argv.
//
// Exit codes: 0 = all checks in the invocation passed, 1 = a check failed
// (with a witness in the output), 2 = usage or input error.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bouton/conserved.hpp"
#include "bouton/nullspace.hpp"
#include "bouton/properties.hpp"
#include "bouton/solutions.hpp"

namespace bouton {

using ordered_json = nlohmann::ordered_json;

namespace cli_detail {

// --- small parsing helpers ---------------------------------------------------

inline std::int64_t parse_int64(std::string_view s) {
  std::int64_t v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  return v;
}

// "p" or "p/q" with an optional leading sign.
inline Rational parse_rational_arg(const std::string& s) {
  std::size_t slash = s.find('/');
  if (slash == std::string::npos) return Rational(parse_int64(s));
  std::int64_t p = parse_int64(std::string_view(s).substr(0, slash));
  std::int64_t q = parse_int64(std::string_view(s).substr(slash + 1));
  if (q == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
  return Rational(p, q);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value) {
  if (flag_given) return flag_value;
  if (const char* env = std::getenv("BOUTON_FORMS_SEED")) {
    std::uint64_t v = 0;
    std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw std::invalid_argument("BOUTON_FORMS_SEED is not an unsigned integer");
    return v;
  }
  return 12345;
}

// --samples accepts "auto" (meaning: let the operation choose) or a count.
inline int parse_samples_arg(const std::string& s, int auto_value) {
  if (s == "auto") return auto_value;
  std::int64_t v = parse_int64(s);
  if (v <= 0) throw std::invalid_argument("--samples must be positive or 'auto'");
  return static_cast<int>(v);
}

inline FiniteTransform parse_transform_spec(const std::string& spec) {
  if (spec == "tshift") return time_translation();
  if (spec == "rot:x") return rotation_x();
  if (spec == "rot:y") return rotation_y();
  if (spec == "rot:z") return rotation_z();
  if (spec.rfind("scale:", 0) == 0) {
    std::optional<Rational> ax, at;
    std::stringstream rest(spec.substr(6));
    std::string item;
    while (std::getline(rest, item, ',')) {
      std::size_t eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("expected ax=<p/q>,at=<p/q> in '" + spec + "'");
      std::string key = item.substr(0, eq);
      Rational val = parse_rational_arg(item.substr(eq + 1));
      if (key == "ax") ax = val;
      else if (key == "at") at = val;
      else throw std::invalid_argument("unknown scale parameter '" + key + "'");
    }
    if (!ax || !at)
      throw std::invalid_argument("scale transform needs both ax and at");
    return finite_scaling(*ax, *at);
  }
  throw std::invalid_argument("unknown transform '" + spec +
                              "' (expected scale:ax=..,at=.., rot:x|y|z, or tshift)");
}

// --- JSON / text shaping -----------------------------------------------------

inline void emit_json(const ordered_json& j, const std::string& path,
                      std::ostream& out) {
  std::string text = j.dump(2);
  text += '\n';
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << text;
  if (!f) throw std::runtime_error("error writing output file: " + path);
}

inline ordered_json witness_json(const ZeroWitness& w) {
  ordered_json point = ordered_json::object();
  for (const auto& [id, val] : w.point) point[symbol_name(id)] = val;
  ordered_json j;
  j["value"] = w.value;
  j["scale"] = w.scale;
  j["point"] = point;
  return j;
}

inline std::string mask_text(Mask m) {
  std::string s;
  for (int v : mask_tuple(m)) {
    if (!s.empty()) s += " /\\ ";
    s += diff_name(v);
  }
  return s.empty() ? "1" : s;
}

inline std::vector<std::string> form_term_strings(const KForm& f) {
  std::vector<std::string> out;
  for (const auto& [m, c] : f.terms()) {
    KForm one(f.degree());
    one.add_term(m, c);
    out.push_back(to_string(one));
  }
  return out;
}

// Largest relative coefficient magnitude of the five Lie derivatives of f at
// seeded sample points; 0 for a structurally conserved form.
inline double numeric_form_residual(const KForm& f, std::uint64_t seed,
                                    int points = 5) {
  double worst = 0.0;
  std::mt19937_64 rng(seed ^ 0x4e516dull);
  ZeroOptions structural;
  structural.structural_only = true;
  for (const VectorField& g : verification_generators()) {
    KForm lf = lie_derivative(g, f);
    std::set<SymbolId> syms;
    for (const auto& [m, c] : lf.terms()) {
      if (is_zero(c, structural).verdict == ZeroResult::Verdict::ZeroStructural)
        continue;
      std::set<SymbolId> s = free_symbols(c);
      syms.insert(s.begin(), s.end());
    }
    for (const auto& [m, c] : lf.terms()) {
      if (is_zero(c, structural).verdict == ZeroResult::Verdict::ZeroStructural)
        continue;
      int done = 0, attempts = 0;
      while (done < points && attempts < points * 40) {
        ++attempts;
        try {
          EvalEnv env;
          env.values = sample_point(syms, rng);
          EvalOut r = eval(c, env);
          worst = std::max(worst, std::abs(r.value) / (1.0 + r.maxmag));
          ++done;
        } catch (const eval_domain_error&) {
        }
      }
    }
  }
  return worst;
}

inline ordered_json conserved_report_json(const ConservedReport& rep) {
  ordered_json checks = ordered_json::array();
  for (const GeneratorCheck& gc : rep.checks) {
    ordered_json c;
    c["generator"] = gc.generator;
    c["zero"] = gc.result.zero;
    c["structural"] = gc.result.structural;
    if (gc.result.failing_mask) c["failing_term"] = mask_text(*gc.result.failing_mask);
    if (gc.result.witness) c["witness"] = witness_json(*gc.result.witness);
    checks.push_back(c);
  }
  return checks;
}

inline void print_conserved_report(const ConservedReport& rep, std::ostream& out) {
  for (const GeneratorCheck& gc : rep.checks) {
    out << "  " << gc.generator << ": "
        << (gc.result.zero ? (gc.result.structural ? "zero (structural)"
                                                   : "zero (probabilistic)")
                           : "NOT zero");
    if (gc.result.failing_mask) out << " at " << mask_text(*gc.result.failing_mask);
    if (gc.result.witness)
      out << " (residual " << gc.result.witness->value << ")";
    out << "\n";
  }
}

// --- reproduce rows ----------------------------------------------------------

struct ReproRow {
  std::string name;
  bool passed = true;
  std::string detail;  // first failure, empty when passed
  long long millis = 0;
};

template <typename Fn>
inline ReproRow timed_row(const std::string& name, Fn&& fn) {
  ReproRow row{name};
  auto t0 = std::chrono::steady_clock::now();
  try {
    std::string detail = fn();  // empty string = pass
    row.passed = detail.empty();
    row.detail = detail;
  } catch (const std::exception& e) {
    row.passed = false;
    row.detail = std::string("exception: ") + e.what();
  }
  row.millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - t0)
                   .count();
  return row;
}

inline std::string row_criticality_table() {
  struct Case {
    int ax, at;
    Criticality verdict;
    int scenario;
    bool blowup_excluded, smooth;
  };
  const std::vector<Case> cases = {
      {1, 2, Criticality::Supercritical, 3, false, false},
      {2, 5, Criticality::Critical, 2, false, false},
      {0, 1, Criticality::Subcritical, 0, false, false},
      {-20, -40, Criticality::Subcritical, 4, true, false},
      {3, 1, Criticality::Supercritical, 3, false, true},
  };
  for (const Case& c : cases) {
    std::string tag = "(" + std::to_string(c.ax) + ", " + std::to_string(c.at) + ")";
    CriticalityReport r = classify_exponents(Rational(c.ax), Rational(c.at));
    if (r.verdict != c.verdict) return tag + ": wrong verdict";
    if (r.energy_exponent != Rational(5 * c.ax - 2 * c.at))
      return tag + ": wrong energy exponent";
    if (r.velocity_exponent != Rational(c.ax - c.at))
      return tag + ": wrong velocity exponent";
    ScenarioReport s = smoothness_scenario(Rational(c.ax), Rational(c.at));
    if (s.scenario != c.scenario) return tag + ": wrong scenario";
    if (s.blowup_excluded != c.blowup_excluded) return tag + ": wrong blow-up status";
    if (s.smooth_at_zero_possible != c.smooth) return tag + ": wrong smoothness status";
  }
  CriticalityReport r01 = classify_exponents(Rational(0), Rational(1));
  if (r01.ratio) return "(0, 1): unexpected ratio report";
  CriticalityReport r2040 = classify_exponents(Rational(-20), Rational(-40));
  if (r2040.severity != Criticality::Supercritical)
    return "(-20, -40): wrong severity";
  return "";
}

inline std::string row_isobaric_ansatz(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xa25a7ull);
  std::uniform_int_distribution<int> numer(-4, 4), denom(1, 3);
  for (int i = 0; i < 5; ++i) {
    Rational ax(numer(rng), denom(rng));
    Rational at(0);
    while (at.is_zero()) at = Rational(numer(rng), denom(rng));
    SolutionFields f = self_similar_ansatz(ax, at);
    IsobaricityReport rep =
        verify_isobaricity(f, ax, at, IsobaricityMode::Combined);
    if (!rep.all_zero || !rep.structural)
      return "pair (" + ax.str() + ", " + at.str() + ") not structurally isobaric";
  }
  IsobaricityReport cls = verify_isobaricity(classical_ansatz(expr_zero()),
                                             Rational(1), Rational(1),
                                             IsobaricityMode::Split);
  if (!cls.all_zero || !cls.structural)
    return "origin-normalized family fails the split relations";
  CovarianceReport vel = covariance_factor(self_similar_ansatz(Rational(1), Rational(2)).u,
                                           Rational(1), Rational(2));
  if (!vel.exponent || *vel.exponent != Rational(-1))
    return "velocity covariance exponent is not ax - at";
  CovarianceReport prs = covariance_factor(self_similar_ansatz(Rational(1), Rational(2)).p,
                                           Rational(1), Rational(2));
  if (!prs.exponent || *prs.exponent != Rational(-2))
    return "pressure covariance exponent is not 2(ax - at)";
  return "";
}

inline std::string row_stagnation(std::uint64_t seed) {
  SolutionFields f = stagnation_solution();
  NSEResidual r = nse_residual(f);
  for (const auto& [label, e] : {std::pair<const char*, const Expr*>{"momentum-x", &r.mom_x},
                                 {"momentum-y", &r.mom_y},
                                 {"momentum-z", &r.mom_z},
                                 {"continuity", &r.cont}})
    if (is_zero(*e).verdict != ZeroResult::Verdict::ZeroStructural)
      return std::string(label) + " residual not structurally zero";

  Expr y = symbol(SYM_Y), x = symbol(SYM_X);
  Expr target = -y * y / (x * x + y * y);
  Expr en = euler_number(f);
  if (is_zero(en - target).verdict != ZeroResult::Verdict::ZeroStructural)
    return "pressure-to-speed ratio is not -y^2/(x^2+y^2)";
  if (is_zero(differentiate(en, SYM_T)).verdict != ZeroResult::Verdict::ZeroStructural)
    return "pressure-to-speed ratio depends on time";

  ZeroOptions tight;
  tight.tol = 1e-10;
  tight.seed = seed;
  SolutionFields shifted = transform_solution(time_translation(), f);
  NSEResidual rs = nse_residual(shifted);
  for (const Expr* e : {&rs.mom_x, &rs.mom_y, &rs.mom_z, &rs.cont})
    if (!is_zero(*e, tight).is_zero()) return "time-shifted variant fails";
  SolutionFields rotated = transform_solution(rotation_z(), f);
  NSEResidual rr = nse_residual(rotated);
  for (const Expr* e : {&rr.mom_x, &rr.mom_y, &rr.mom_z, &rr.cont})
    if (!is_zero(*e, tight).is_zero()) return "rotated variant fails";
  return "";
}

inline std::string row_scalar_invariance(std::uint64_t seed) {
  ZeroOptions structural;
  structural.structural_only = true;
  ZeroOptions sampled;
  sampled.points = 100;
  sampled.tol = 1e-12;
  sampled.seed = seed;
  sampled.skip_structural = true;
  for (const KForm& f : {KForm::scalar(expr_one()), catalog_form(0)}) {
    ConservedReport s = verify_conserved(f, structural);
    if (!s.all_zero || !s.structural) return "scalar invariant fails structurally";
    ConservedReport p = verify_conserved(f, sampled);
    if (!p.all_zero) return "scalar invariant fails the sampled residual check";
  }
  return "";
}

inline std::string row_invariant_arguments() {
  ScalingInvariants inv = invariant_arguments();
  const std::set<std::string> expected = {"y/x",    "z/x",      "t*u/x",
                                         "t*v/x",  "t*w/x",    "t*nu/x^2",
                                         "t^2*p/x^2"};
  std::set<std::string> got(inv.labels.begin(), inv.labels.end());
  if (got != expected) {
    std::string s = "unexpected invariant set:";
    for (const std::string& l : inv.labels) s += " " + l;
    return s;
  }
  ZeroOptions structural;
  structural.structural_only = true;
  for (const Expr& e : inv.invariants)
    for (const VectorField& g : {gen_X1(), gen_X2()})
      if (is_zero(apply_generator(g, e), structural).verdict !=
          ZeroResult::Verdict::ZeroStructural)
        return "an invariant is not annihilated by " + g.name;
  return "";
}

inline std::string row_conserved_catalog() {
  ZeroOptions structural;
  structural.structural_only = true;
  for (int k : catalog_degrees()) {
    ConservedReport rep = verify_conserved(catalog_form(k), structural);
    if (!rep.all_zero || !rep.structural) {
      for (const GeneratorCheck& gc : rep.checks)
        if (!gc.result.zero)
          return "degree " + std::to_string(k) + " fails along " + gc.generator;
      return "degree " + std::to_string(k) + " fails";
    }
  }
  return "";
}

inline std::string row_catalog_discrepancies(std::uint64_t seed, int threads) {
  const std::map<int, std::pair<std::size_t, std::size_t>> expect = {
      {2, {8, 2}}, {4, {16, 2}}, {6, {4, 6}}};  // clean slots, flagged slots
  for (const auto& [k, counts] : expect) {
    KForm bad = catalog_form(k, CatalogVariant::Verbatim);
    ZeroOptions opts;
    opts.seed = seed;
    opts.points = 10;
    ConservedReport rep = verify_conserved(bad, opts);
    std::set<std::string> failing;
    for (const GeneratorCheck& gc : rep.checks)
      if (!gc.result.zero) failing.insert(gc.generator);
    if (failing != std::set<std::string>{"Rx", "Ry", "Rz"})
      return "degree " + std::to_string(k) + ": unexpected failing generator set";
    for (const GeneratorCheck& gc : rep.checks)
      if (!gc.result.zero && (!gc.result.failing_mask || !gc.result.witness))
        return "degree " + std::to_string(k) + ": failure lacks a witness";

    SolveOptions sopts;
    sopts.seed = seed;
    sopts.threads = threads;
    sopts.verify.points = 10;
    NullspaceResult ns = solve_forms(k, sopts);
    CatalogComparison cmp = compare_with_catalog(ns, CatalogVariant::Verbatim);
    if (!cmp.arbitrated) return "degree " + std::to_string(k) + ": fit did not converge";
    if (cmp.clean != counts.first || cmp.flagged.size() != counts.second)
      return "degree " + std::to_string(k) + ": unexpected flag pattern (" +
             std::to_string(cmp.clean) + " clean, " +
             std::to_string(cmp.flagged.size()) + " flagged)";
    if (!(cmp.masked_distance < 1e-6))
      return "degree " + std::to_string(k) + ": masked distance too large";
    CatalogComparison good = compare_with_catalog(ns, CatalogVariant::Corrected);
    if (!good.within_span || good.masked_distance != 0.0)
      return "degree " + std::to_string(k) + ": corrected table not in solver span";
  }
  return "";
}

inline std::string row_empty_degrees(std::uint64_t seed, int threads) {
  for (int k : {1, 7}) {
    SolveOptions sopts;
    sopts.seed = seed;
    sopts.threads = threads;
    sopts.verify.points = 10;
    NullspaceResult ns = solve_forms(k, sopts);
    if (ns.dim() != 0)
      return "degree " + std::to_string(k) + ": unexpected dimension " +
             std::to_string(ns.dim());
    if (!(ns.gap_ratio >= 1e3))
      return "degree " + std::to_string(k) + ": gap ratio below 1e3";
  }
  return "";
}

inline std::vector<ReproRow> reproduce_core_rows(std::uint64_t seed, int threads) {
  std::vector<ReproRow> rows;
  rows.push_back(timed_row("criticality-table", [] { return row_criticality_table(); }));
  rows.push_back(timed_row("isobaric-ansatz", [&] { return row_isobaric_ansatz(seed); }));
  rows.push_back(
      timed_row("stagnation-exact-solution", [&] { return row_stagnation(seed); }));
  rows.push_back(
      timed_row("scalar-invariance", [&] { return row_scalar_invariance(seed); }));
  rows.push_back(
      timed_row("scaling-invariant-arguments", [] { return row_invariant_arguments(); }));
  rows.push_back(
      timed_row("conserved-catalog", [] { return row_conserved_catalog(); }));
  rows.push_back(timed_row("catalog-discrepancies",
                           [&] { return row_catalog_discrepancies(seed, threads); }));
  rows.push_back(
      timed_row("empty-degrees", [&] { return row_empty_degrees(seed, threads); }));
  return rows;
}

inline std::vector<ReproRow> reproduce_property_rows(std::uint64_t seed) {
  std::vector<ReproRow> rows;
  const std::vector<std::function<PropertySuiteResult()>> suites = {
      [=] { return property_d_squared(seed); },
      [=] { return property_cartan_vs_flow(seed); },
      [=] { return property_leibniz(seed); },
      [=] { return property_weights(seed); },
      [=] { return property_derivative_fd(seed); }};
  for (const auto& fn : suites) {
    auto t0 = std::chrono::steady_clock::now();
    PropertySuiteResult r = fn();
    ReproRow row{"prop-" + r.suite};
    row.passed = r.passed;
    if (!r.passed)
      for (const PropertyCheck& c : r.checks)
        if (!c.passed && row.detail.empty()) row.detail = c.name + ": " + c.note;
    row.millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cli_detail

// Runs the command given as plain arguments (program name excluded), writing
// all output to `out`. Returns the process exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out) {
  using namespace cli_detail;

  CLI::App app{"Symbolic workbench for scaling symmetries, differential forms, "
               "and conserved quantities of the incompressible flow equations"};
  app.name("bouton");
  app.require_subcommand(1);
  int rc = 0;

  // Shared flag storage. Each subcommand binds the subset it uses.
  struct {
    std::string expr, form, file, json_path;
    std::string transform, gen, variant = "corrected", family = "self-similar";
    std::string mode = "combined", suite = "all", samples = "auto";
    std::string ax, at;
    bool check = false, doubled_pressure = false;
    int k = 0;
    double tol = 1e-9;
    std::uint64_t seed = 12345;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  } opt;
  // Option presence is per subcommand, so each block keeps its own pointers
  // (captured by value in the callback; the options outlive the parse).
  auto add_json = [&](CLI::App* sub) {
    return sub->add_option("--json", opt.json_path,
                           "JSON output; optional value = output file path")
        ->expected(0, 1);
  };
  auto add_seed = [&](CLI::App* sub) {
    return sub->add_option("--seed", opt.seed,
                           "random seed (fallback: BOUTON_FORMS_SEED, then 12345)");
  };
  auto zero_opts = [&](int auto_points, std::uint64_t seed) {
    ZeroOptions z;
    z.points = parse_samples_arg(opt.samples, auto_points);
    z.tol = opt.tol;
    z.seed = seed;
    return z;
  };

  // --- weights ---------------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand("weights", "Scaling weight of an expression");
    sub->add_option("--expr", opt.expr, "expression in the workbench syntax")
        ->required();
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, jopt] {
      Expr e = parse_expr(opt.expr);
      WeightReport r = weight_of(e);
      const char* status = r.status == WeightStatus::Uniform ? "uniform"
                           : r.status == WeightStatus::Mixed ? "mixed"
                                                             : "undetermined";
      if (jopt->count() > 0) {
        ordered_json j;
        j["expr"] = opt.expr;
        j["status"] = status;
        if (r.weight) {
          j["weight"] = ordered_json{{"a", r.weight->a.str()}, {"b", r.weight->b.str()}};
        } else {
          j["weight"] = nullptr;
        }
        j["note"] = r.note;
        emit_json(j, opt.json_path, out);
      } else {
        if (r.weight) out << "weight " << r.weight->str() << "\n";
        else out << status << (r.note.empty() ? "" : ": " + r.note) << "\n";
      }
    });
  }

  // --- classify --------------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "classify", "Criticality classification of a scaling exponent pair");
    sub->add_option("--ax", opt.ax, "space exponent, rational p/q")->required();
    sub->add_option("--at", opt.at, "time exponent, rational p/q")->required();
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, jopt] {
      Rational ax = parse_rational_arg(opt.ax), at = parse_rational_arg(opt.at);
      CriticalityReport r = classify_exponents(ax, at);
      ScenarioReport s = smoothness_scenario(ax, at);
      if (jopt->count() > 0) {
        ordered_json j;
        j["verdict"] = to_cstring(r.verdict);
        j["energy_exponent"] = r.energy_exponent.str();
        j["velocity_exponent"] = r.velocity_exponent.str();
        j["scenario"] = s.scenario;
        j["blowup_excluded"] = s.blowup_excluded;
        j["severity_verdict"] = to_cstring(r.severity);
        emit_json(j, opt.json_path, out);
      } else {
        out << "pair (" << ax.str() << ", " << at.str() << "): "
            << to_cstring(r.verdict) << "\n";
        out << "energy exponent " << r.energy_exponent.str() << ", velocity exponent "
            << r.velocity_exponent.str() << "\n";
        out << "severity: " << to_cstring(r.severity) << "\n";
        if (r.ratio)
          out << "|at/ax| = " << r.ratio->str() << " (" << to_cstring(*r.ratio_verdict)
              << " by the 1/2 threshold)\n";
        if (s.applicable)
          out << "scenario " << s.scenario << "; blow-up "
              << (s.blowup_excluded ? "excluded" : "not excluded")
              << "; smooth data at t = 0 "
              << (s.smooth_at_zero_possible ? "possible" : "impossible") << "\n";
        else
          out << "scenario: not applicable (an exponent is zero)\n";
      }
    });
  }

  // --- scenario --------------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "scenario", "Sign/criticality scenario of a scaling exponent pair");
    sub->add_option("--ax", opt.ax, "space exponent, rational p/q")->required();
    sub->add_option("--at", opt.at, "time exponent, rational p/q")->required();
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, jopt] {
      Rational ax = parse_rational_arg(opt.ax), at = parse_rational_arg(opt.at);
      ScenarioReport s = smoothness_scenario(ax, at);
      if (jopt->count() > 0) {
        ordered_json j;
        j["ax"] = ax.str();
        j["at"] = at.str();
        j["applicable"] = s.applicable;
        j["scenario"] = s.scenario;
        j["verdict"] = to_cstring(s.verdict);
        j["blowup_excluded"] = s.blowup_excluded;
        j["smooth_at_zero_possible"] = s.smooth_at_zero_possible;
        emit_json(j, opt.json_path, out);
      } else if (s.applicable) {
        out << "scenario " << s.scenario << " (" << to_cstring(s.verdict) << ", at "
            << (at.sign() > 0 ? "> 0" : "< 0") << ")\n";
        out << "blow-up " << (s.blowup_excluded ? "excluded" : "not excluded") << "\n";
        out << "smooth data at t = 0 "
            << (s.smooth_at_zero_possible ? "possible" : "impossible") << "\n";
      } else {
        out << "not applicable (an exponent is zero); verdict "
            << to_cstring(s.verdict) << "\n";
      }
    });
  }

  // --- apply -----------------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "apply", "Apply a finite transform to an expression, form, or solution");
    sub->add_option("--transform", opt.transform,
                    "scale:ax=<p/q>,at=<p/q> | rot:x | rot:y | rot:z | tshift")
        ->required();
    CLI::Option* oe = sub->add_option("--expr", opt.expr, "expression input");
    CLI::Option* of = sub->add_option("--form", opt.form, "differential-form input");
    CLI::Option* op = sub->add_option("--file", opt.file, "solution file input");
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, oe, of, op, jopt] {
      int given = (oe->count() > 0) + (of->count() > 0) + (op->count() > 0);
      if (given != 1)
        throw std::invalid_argument("exactly one of --expr, --form, --file is required");
      FiniteTransform ft = parse_transform_spec(opt.transform);
      ordered_json j;
      j["transform"] = ft.name;
      std::string text;
      if (oe->count() > 0) {
        Expr moved = ft.apply(parse_expr(opt.expr));
        j["input"] = "expr";
        j["result"] = to_string(moved);
        text = to_string(moved);
      } else if (of->count() > 0) {
        KForm moved = ft.apply(parse_form(opt.form));
        j["input"] = "form";
        j["result"] = to_string(moved);
        text = to_string(moved);
      } else {
        SolutionFields moved =
            transform_solution(ft, parse_solution(read_text_file(opt.file)));
        j["input"] = "solution";
        ordered_json fields;
        fields["u"] = to_string(moved.u);
        fields["v"] = to_string(moved.v);
        fields["w"] = to_string(moved.w);
        fields["p"] = to_string(moved.p);
        if (moved.nu) fields["nu"] = to_string(*moved.nu);
        if (moved.tau) fields["tau"] = to_string(*moved.tau);
        j["result"] = fields;
        text = print_solution(moved);
        if (!text.empty() && text.back() == '\n') text.pop_back();
      }
      if (jopt->count() > 0) emit_json(j, opt.json_path, out);
      else out << text << "\n";
    });
  }

  // --- lie -------------------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "lie", "Lie derivative along a generator (expression or form)");
    sub->add_option("--gen", opt.gen, "generator: T X X1 X2 Rx Ry Rz")->required();
    CLI::Option* oe = sub->add_option("--expr", opt.expr, "expression input");
    CLI::Option* of = sub->add_option("--form", opt.form, "differential-form input");
    CLI::Option* op = sub->add_option("--file", opt.file, "differential-form file input");
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, oe, of, op, jopt] {
      int given = (oe->count() > 0) + (of->count() > 0) + (op->count() > 0);
      if (given != 1)
        throw std::invalid_argument("exactly one of --expr, --form, --file is required");
      const VectorField* g = find_generator(opt.gen);
      if (!g) throw std::invalid_argument("unknown generator '" + opt.gen + "'");
      ZeroOptions structural;
      structural.structural_only = true;
      ordered_json j;
      j["generator"] = g->name;
      std::string text;
      bool zero = false;
      if (oe->count() > 0) {
        Expr r = apply_generator(*g, parse_expr(opt.expr));
        j["input"] = "expr";
        text = to_string(r);
        zero = is_zero(r, structural).verdict == ZeroResult::Verdict::ZeroStructural;
      } else {
        KForm f = parse_form(of->count() > 0 ? opt.form : read_text_file(opt.file));
        KForm r = lie_derivative(*g, f);
        j["input"] = "form";
        text = to_string(r);
        FormZeroCheck z = form_is_zero(r, structural);
        zero = z.zero && z.structural;
      }
      j["result"] = text;
      j["structurally_zero"] = zero;
      if (jopt->count() > 0) emit_json(j, opt.json_path, out);
      else out << text << (zero ? "\n(structurally zero)\n" : "\n");
    });
  }

  // --- verify-form -----------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "verify-form", "Check a form's invariance along all five generators");
    sub->add_option("--k", opt.k, "form degree 0..8")->required();
    CLI::Option* of =
        sub->add_option("--form", opt.file, "form file (default: built-in table)");
    sub->add_option("--variant", opt.variant, "built-in table variant")
        ->check(CLI::IsMember({"corrected", "verbatim"}));
    sub->add_option("--tol", opt.tol, "sampling tolerance (default 1e-9)");
    sub->add_option("--samples", opt.samples, "sample points per check, or 'auto'");
    CLI::Option* sopt = add_seed(sub);
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, of, sopt, jopt] {
      KForm f(0);
      std::string source;
      if (of->count() > 0) {
        f = parse_form(read_text_file(opt.file));
        if (f.degree() != opt.k && !f.empty())
          throw std::invalid_argument("form in file has degree " +
                                      std::to_string(f.degree()) + ", not " +
                                      std::to_string(opt.k));
        source = opt.file;
      } else {
        CatalogVariant variant = opt.variant == "verbatim" ? CatalogVariant::Verbatim
                                                           : CatalogVariant::Corrected;
        f = catalog_form(opt.k, variant);
        source = "builtin:" + opt.variant;
      }
      ConservedReport rep = verify_conserved(
          f, zero_opts(25, resolve_seed(sopt->count() > 0, opt.seed)));
      if (jopt->count() > 0) {
        ordered_json j;
        j["verified"] = rep.all_zero;
        j["generators"] = static_cast<int>(rep.checks.size());
        j["k"] = opt.k;
        j["source"] = source;
        j["structural"] = rep.structural;
        j["checks"] = conserved_report_json(rep);
        emit_json(j, opt.json_path, out);
      } else {
        out << "degree " << opt.k << " form (" << source << "):\n";
        print_conserved_report(rep, out);
        out << (rep.all_zero ? "verified" : "NOT verified") << " along "
            << rep.checks.size() << " generators\n";
      }
      if (!rep.all_zero) rc = 1;
    });
  }

  // --- solve-forms -----------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "solve-forms", "Derive all conserved forms of a degree from the ansatz");
    CLI::Option* ok = sub->add_option("--k", opt.k, "form degree 0..8");
    CLI::Option* od = sub->add_option("--degree", opt.k, "alias for --k")
                          ->excludes(ok);
    sub->add_option("--samples", opt.samples, "sample points, or 'auto'");
    sub->add_option("--threads", opt.threads, "worker threads for row assembly");
    CLI::Option* sopt = add_seed(sub);
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, ok, od, sopt, jopt] {
      if (ok->count() == 0 && od->count() == 0)
        throw std::invalid_argument("--k (or --degree) is required");
      SolveOptions sopts;
      sopts.seed = resolve_seed(sopt->count() > 0, opt.seed);
      sopts.threads = opt.threads;
      sopts.samples = parse_samples_arg(opt.samples, 0);
      NullspaceResult res = solve_forms(opt.k, sopts);
      bool all_verified = true;
      for (const NullspaceForm& nf : res.forms)
        all_verified = all_verified && nf.verified;
      if (jopt->count() > 0) {
        ordered_json j;
        j["k"] = res.k;
        j["unknowns"] = res.unknowns;
        j["rows"] = res.rows;
        j["samples"] = res.samples;
        j["singular_values"] = res.smallest_sigmas;
        j["sigma_max"] = res.sigma_max;
        j["gap_ratio"] = res.gap_ratio;
        j["nullspace_dim"] = res.dim();
        ordered_json forms = ordered_json::array();
        for (const NullspaceForm& nf : res.forms) {
          ordered_json fj;
          fj["terms"] = form_term_strings(nf.form);
          fj["sigma"] = nf.sigma;
          fj["verified"] = nf.verified;
          fj["structural"] = nf.structural;
          fj["residual"] = nf.structural
                               ? 0.0
                               : numeric_form_residual(nf.form, sopts.seed);
          forms.push_back(fj);
        }
        j["forms"] = forms;
        emit_json(j, opt.json_path, out);
      } else {
        out << "degree " << res.k << ": " << res.unknowns << " unknowns, " << res.rows
            << " rows from " << res.samples << " samples\n";
        out << "nullspace dimension " << res.dim() << "; gap ratio " << res.gap_ratio
            << "\n";
        std::size_t i = 0;
        for (const NullspaceForm& nf : res.forms) {
          out << "form " << ++i << " (sigma " << nf.sigma << ", "
              << (nf.verified ? (nf.structural ? "verified structurally"
                                               : "verified")
                              : "NOT verified")
              << "):\n  " << to_string(nf.form) << "\n";
        }
      }
      if (!all_verified) rc = 1;
    });
  }

  // --- residual ---------------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "residual", "Momentum and continuity residuals of a solution file");
    sub->add_option("--file", opt.file, "solution file")->required();
    sub->add_option("--tol", opt.tol, "sampling tolerance (default 1e-9)");
    sub->add_option("--samples", opt.samples, "sample points per check, or 'auto'");
    CLI::Option* sopt = add_seed(sub);
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, sopt, jopt] {
      SolutionFields f = parse_solution(read_text_file(opt.file));
      NSEResidual r = nse_residual(f);
      ZeroOptions z = zero_opts(25, resolve_seed(sopt->count() > 0, opt.seed));
      const std::pair<const char*, const Expr*> comps[4] = {{"momentum-x", &r.mom_x},
                                                            {"momentum-y", &r.mom_y},
                                                            {"momentum-z", &r.mom_z},
                                                            {"continuity", &r.cont}};
      bool all_zero = true, structural = true;
      ordered_json checks = ordered_json::array();
      std::ostringstream text;
      for (const auto& [label, e] : comps) {
        ZeroResult zr = is_zero(*e, z);
        all_zero = all_zero && zr.is_zero();
        structural =
            structural && zr.verdict == ZeroResult::Verdict::ZeroStructural;
        ordered_json c;
        c["component"] = label;
        c["verdict"] = to_cstring(zr.verdict);
        if (zr.witness) c["witness"] = witness_json(*zr.witness);
        checks.push_back(c);
        text << "  " << label << ": " << to_cstring(zr.verdict) << "\n";
      }
      if (jopt->count() > 0) {
        ordered_json j;
        j["all_zero"] = all_zero;
        j["structural"] = structural;
        j["checks"] = checks;
        emit_json(j, opt.json_path, out);
      } else {
        out << text.str();
        out << (all_zero ? "solution verified" : "NOT a solution") << "\n";
      }
      if (!all_zero) rc = 1;
    });
  }

  // --- euler -----------------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "euler", "Pressure-to-squared-speed ratio of a solution file");
    sub->add_option("--file", opt.file, "solution file")->required();
    sub->add_option("--tol", opt.tol, "sampling tolerance (default 1e-9)");
    sub->add_option("--samples", opt.samples, "sample points per check, or 'auto'");
    CLI::Option* sopt = add_seed(sub);
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, sopt, jopt] {
      SolutionFields f = parse_solution(read_text_file(opt.file));
      Expr en = euler_number(f);
      ZeroResult dt = is_zero(differentiate(en, SYM_T),
                              zero_opts(25, resolve_seed(sopt->count() > 0, opt.seed)));
      if (jopt->count() > 0) {
        ordered_json j;
        j["euler_number"] = to_string(en);
        j["time_independent"] = dt.is_zero();
        j["time_derivative_verdict"] = to_cstring(dt.verdict);
        emit_json(j, opt.json_path, out);
      } else {
        out << to_string(en) << "\n";
        out << "time derivative: " << to_cstring(dt.verdict) << "\n";
      }
    });
  }

  // --- ansatz ----------------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "ansatz", "Build a scale-covariant solution ansatz");
    sub->add_option("--family", opt.family, "self-similar | classical | additive")
        ->check(CLI::IsMember({"self-similar", "classical", "additive"}));
    CLI::Option* oax = sub->add_option("--ax", opt.ax, "space exponent, rational p/q");
    CLI::Option* oat = sub->add_option("--at", opt.at, "time exponent, rational p/q");
    sub->add_flag("--check", opt.check, "verify the defining scaling relations");
    sub->add_option("--mode", opt.mode, "relation check mode")
        ->check(CLI::IsMember({"combined", "split"}));
    sub->add_flag("--doubled-pressure", opt.doubled_pressure,
                  "additive family: double the spatial pressure exponent");
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, oax, oat, jopt] {
      ordered_json j;
      j["family"] = opt.family;
      std::ostringstream text;
      std::optional<SolutionFields> fields;
      Rational ax(0), at(0);
      if (opt.family != "classical") {
        if (oax->count() == 0 || oat->count() == 0)
          throw std::invalid_argument("--ax and --at are required for this family");
        ax = parse_rational_arg(opt.ax);
        at = parse_rational_arg(opt.at);
        j["ax"] = ax.str();
        j["at"] = at.str();
      }
      if (opt.family == "self-similar") {
        fields = self_similar_ansatz(ax, at);
      } else if (opt.family == "classical") {
        fields = classical_ansatz();
      } else {
        AdditiveAnsatz a = additive_ansatz(ax, at, opt.doubled_pressure);
        j["velocity"] = to_string(a.velocity);
        j["pressure"] = to_string(a.pressure);
        text << "velocity = " << to_string(a.velocity) << "\n";
        text << "pressure = " << to_string(a.pressure) << "\n";
        if (opt.check)
          throw std::invalid_argument(
              "--check applies to the self-similar and classical families");
      }
      if (fields) {
        ordered_json fj;
        fj["u"] = to_string(fields->u);
        fj["v"] = to_string(fields->v);
        fj["w"] = to_string(fields->w);
        fj["p"] = to_string(fields->p);
        if (fields->tau) fj["tau"] = to_string(*fields->tau);
        j["fields"] = fj;
        text << print_solution(*fields);
        if (opt.check) {
          SolutionFields subject = *fields;
          Rational cax = ax, cat = at;
          if (opt.family == "classical") {
            subject = classical_ansatz(expr_zero());  // relations hold at tau = 0
            cax = Rational(1);
            cat = Rational(1);
          }
          IsobaricityMode mode = opt.mode == "split" ? IsobaricityMode::Split
                                                     : IsobaricityMode::Combined;
          IsobaricityReport rep = verify_isobaricity(subject, cax, cat, mode);
          ordered_json cj;
          cj["mode"] = opt.mode;
          cj["all_zero"] = rep.all_zero;
          cj["structural"] = rep.structural;
          ordered_json items = ordered_json::array();
          for (const IsobaricityCheck& c : rep.checks) {
            items.push_back(ordered_json{{"relation", c.label},
                                         {"verdict", to_cstring(c.verdict.verdict)}});
            text << "  " << c.label << ": " << to_cstring(c.verdict.verdict) << "\n";
          }
          cj["checks"] = items;
          j["scaling_relations"] = cj;
          if (!rep.all_zero) rc = 1;
        }
      }
      if (jopt->count() > 0) emit_json(j, opt.json_path, out);
      else out << text.str();
    });
  }

  // --- invariant-args --------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "invariant-args", "Joint invariants of the two scaling generators");
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, jopt] {
      ScalingInvariants inv = invariant_arguments();
      if (jopt->count() > 0) {
        ordered_json j;
        j["candidates"] = inv.candidates;
        j["count"] = inv.labels.size();
        j["invariants"] = inv.labels;
        emit_json(j, opt.json_path, out);
      } else {
        out << inv.labels.size() << " joint invariants (from " << inv.candidates
            << " candidate monomials):\n";
        for (const std::string& l : inv.labels) out << "  " << l << "\n";
      }
    });
  }

  // --- reproduce -------------------------------------------------------------
  {
    CLI::App* sub = app.add_subcommand(
        "reproduce", "Run a result suite and print a pass/fail matrix");
    sub->add_option("--suite", opt.suite, "core | properties | all")
        ->check(CLI::IsMember({"core", "properties", "all", "paper-table"}));
    sub->add_option("--threads", opt.threads, "worker threads for the solver rows");
    CLI::Option* sopt = add_seed(sub);
    CLI::Option* jopt = add_json(sub);
    sub->callback([&, sopt, jopt] {
      std::string suite = opt.suite == "paper-table" ? "core" : opt.suite;
      std::uint64_t seed = resolve_seed(sopt->count() > 0, opt.seed);
      std::vector<ReproRow> rows;
      if (suite == "core" || suite == "all") {
        std::vector<ReproRow> core = reproduce_core_rows(seed, opt.threads);
        rows.insert(rows.end(), core.begin(), core.end());
      }
      if (suite == "properties" || suite == "all") {
        std::vector<ReproRow> props = reproduce_property_rows(seed);
        rows.insert(rows.end(), props.begin(), props.end());
      }
      bool all = true;
      for (const ReproRow& r : rows) all = all && r.passed;
      if (jopt->count() > 0) {
        ordered_json j;
        j["suite"] = suite;
        j["seed"] = seed;
        j["passed"] = all;
        ordered_json rj = ordered_json::array();
        for (const ReproRow& r : rows) {
          ordered_json row;
          row["name"] = r.name;
          row["passed"] = r.passed;
          if (!r.passed) row["detail"] = r.detail;
          rj.push_back(row);
        }
        j["rows"] = rj;
        emit_json(j, opt.json_path, out);
      } else {
        for (const ReproRow& r : rows) {
          out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
          for (std::size_t pad = r.name.size(); pad < 28; ++pad) out << ' ';
          out << " " << r.millis << " ms";
          if (!r.passed) out << "  -- " << r.detail;
          out << "\n";
        }
        out << (all ? "all rows passed" : "FAILURES above") << "\n";
      }
      if (!all) rc = 1;
    });
  }

  // --- dispatch --------------------------------------------------------------
  std::reverse(args.begin(), args.end());  // CLI11's vector parse order
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    std::vector<CLI::App*> subs = app.get_subcommands();
    if (!subs.empty()) target = subs.front();
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}

}  // namespace bouton
