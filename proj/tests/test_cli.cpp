#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bouton/cli.hpp"

using bouton::run_cli;
using nlohmann::json;

namespace {

struct CliResult {
  int rc;
  std::string out;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream os;
  int rc = run_cli(std::move(args), os);
  return {rc, os.str()};
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  std::filesystem::path p = std::filesystem::temp_directory_path() / name;
  std::ofstream f(p, std::ios::binary);
  f << text;
  return p;
}

struct EnvGuard {
  std::string name;
  explicit EnvGuard(std::string n, const std::string& value) : name(std::move(n)) {
    ::setenv(name.c_str(), value.c_str(), 1);
  }
  ~EnvGuard() { ::unsetenv(name.c_str()); }
};

const std::string stagnation_text =
    "u = x / (t + tau)\n"
    "v = -y / (t + tau)\n"
    "w = 0\n"
    "p = -y^2 / (t + tau)^2\n";

}  // namespace

TEST_CASE("weights subcommand reports scaling weights", "[cli]") {
  CliResult r = cli({"weights", "--expr", "u^2+v^2+w^2"});
  CHECK(r.rc == 0);
  CHECK(r.out == "weight (2, -2)\n");

  CliResult j = cli({"weights", "--expr", "u^2+v^2+w^2", "--json"});
  CHECK(j.rc == 0);
  json doc = json::parse(j.out);
  CHECK(doc["status"] == "uniform");
  CHECK(doc["weight"]["a"] == "2");
  CHECK(doc["weight"]["b"] == "-2");

  CliResult mixed = cli({"weights", "--expr", "x + t", "--json"});
  CHECK(mixed.rc == 0);
  CHECK(json::parse(mixed.out)["status"] == "mixed");
}

TEST_CASE("classify emits the documented JSON fields", "[cli]") {
  CliResult r = cli({"classify", "--ax", "1", "--at", "2", "--json"});
  REQUIRE(r.rc == 0);
  json doc = json::parse(r.out);
  CHECK(doc["verdict"] == "supercritical");
  CHECK(doc["energy_exponent"] == "1");
  CHECK(doc["velocity_exponent"] == "-1");
  CHECK(doc["scenario"] == 3);
  CHECK(doc["blowup_excluded"] == false);
  CHECK(doc["severity_verdict"] == "supercritical");

  json neg = json::parse(cli({"classify", "--ax", "-20", "--at", "-40", "--json"}).out);
  CHECK(neg["verdict"] == "subcritical");
  CHECK(neg["scenario"] == 4);
  CHECK(neg["blowup_excluded"] == true);
  CHECK(neg["severity_verdict"] == "supercritical");

  json frac = json::parse(cli({"classify", "--ax", "2/3", "--at", "5/3", "--json"}).out);
  CHECK(frac["energy_exponent"] == "0");
  CHECK(frac["verdict"] == "critical");

  CliResult text = cli({"classify", "--ax", "3", "--at", "1"});
  CHECK(text.rc == 0);
  CHECK(text.out.find("supercritical") != std::string::npos);
  CHECK(text.out.find("smooth data at t = 0 possible") != std::string::npos);
}

TEST_CASE("scenario subcommand mirrors the scenario table", "[cli]") {
  json doc = json::parse(cli({"scenario", "--ax", "-20", "--at", "-40", "--json"}).out);
  CHECK(doc["applicable"] == true);
  CHECK(doc["scenario"] == 4);
  CHECK(doc["blowup_excluded"] == true);
  CHECK(doc["smooth_at_zero_possible"] == false);

  json na = json::parse(cli({"scenario", "--ax", "0", "--at", "1", "--json"}).out);
  CHECK(na["applicable"] == false);
  CHECK(na["scenario"] == 0);
}

TEST_CASE("apply transforms expressions, forms, and solutions", "[cli]") {
  CliResult e = cli({"apply", "--transform", "scale:ax=1,at=2", "--expr", "p"});
  CHECK(e.rc == 0);
  CHECK(e.out == "p/k^2\n");

  CliResult f = cli({"apply", "--transform", "tshift", "--expr", "t"});
  CHECK(f.out == "t + tau\n");

  CliResult form = cli({"apply", "--transform", "scale:ax=1,at=0", "--form",
                        "x dt /\\ dp", "--json"});
  REQUIRE(form.rc == 0);
  json doc = json::parse(form.out);
  CHECK(doc["input"] == "form");
  // dt is fixed, dp picks up k^2, and the coefficient x picks up k.
  CHECK(doc["result"] == "x*k^3 dt /\\ dp");

  std::filesystem::path sol = write_temp("bouton_cli_sol.txt", stagnation_text);
  CliResult s = cli({"apply", "--transform", "rot:z", "--file", sol.string(), "--json"});
  REQUIRE(s.rc == 0);
  json sj = json::parse(s.out);
  CHECK(sj["input"] == "solution");
  CHECK(sj["result"]["w"] == "0");
  CHECK(std::string(sj["result"]["u"]).find("cos_theta") != std::string::npos);
}

TEST_CASE("lie reports structural zeros of invariant inputs", "[cli]") {
  json rot = json::parse(cli({"lie", "--gen", "Rz", "--expr", "u^2+v^2", "--json"}).out);
  CHECK(rot["structurally_zero"] == true);

  json x = json::parse(
      cli({"lie", "--gen", "X", "--form", "p/(u^2+v^2+w^2)", "--json"}).out);
  CHECK(x["structurally_zero"] == true);

  json t = json::parse(cli({"lie", "--gen", "T", "--expr", "t*u", "--json"}).out);
  CHECK(t["structurally_zero"] == false);
  CHECK(t["result"] == "u");

  CHECK(cli({"lie", "--gen", "Qq", "--expr", "u"}).rc == 2);
}

TEST_CASE("verify-form matches its documented schema and exit codes", "[cli]") {
  CliResult r = cli({"verify-form", "--k", "8", "--json"});
  REQUIRE(r.rc == 0);
  json doc = json::parse(r.out);
  CHECK(doc["verified"] == true);
  CHECK(doc["generators"] == 5);
  CHECK(doc["structural"] == true);
  REQUIRE(doc["checks"].size() == 5);
  CHECK(doc["checks"][0]["generator"] == "T");

  // The uncorrected table entries break the rotation checks only.
  CliResult bad = cli({"verify-form", "--k", "2", "--variant", "verbatim", "--json",
                       "--samples", "10"});
  CHECK(bad.rc == 1);
  json bj = json::parse(bad.out);
  CHECK(bj["verified"] == false);
  int failing = 0;
  for (const auto& c : bj["checks"]) {
    if (c["zero"] == false) {
      ++failing;
      CHECK(c.contains("failing_term"));
      CHECK(c.contains("witness"));
      std::string gen = c["generator"];
      CHECK((gen == "Rx" || gen == "Ry" || gen == "Rz"));
    }
  }
  CHECK(failing == 3);

  CHECK(cli({"verify-form", "--k", "1"}).rc == 2);  // no built-in form there
}

TEST_CASE("solve-forms emits the solver schema and is byte-deterministic", "[cli]") {
  CliResult a = cli({"solve-forms", "--k", "0", "--json"});
  REQUIRE(a.rc == 0);
  json doc = json::parse(a.out);
  CHECK(doc["k"] == 0);
  CHECK(doc["unknowns"] == 18);
  CHECK(doc["nullspace_dim"] == 2);
  REQUIRE(doc["forms"].size() == 2);
  for (const auto& f : doc["forms"]) {
    CHECK(f["verified"] == true);
    CHECK(f["residual"] == 0.0);
    CHECK(f["terms"].size() >= 1);
  }
  CHECK(doc["singular_values"].size() == 10);  // dim + 8 leading values

  CliResult b = cli({"solve-forms", "--k", "0", "--json"});
  CHECK(a.out == b.out);

  CliResult c = cli({"solve-forms", "--degree", "0", "--threads", "3", "--json"});
  CHECK(a.out == c.out);

  CliResult empty = cli({"solve-forms", "--k", "7", "--json"});
  REQUIRE(empty.rc == 0);
  json ej = json::parse(empty.out);
  CHECK(ej["nullspace_dim"] == 0);
  CHECK(double(ej["gap_ratio"]) >= 1e3);

  CHECK(cli({"solve-forms"}).rc == 2);  // degree is required
}

TEST_CASE("seed resolution prefers the flag over the environment", "[cli]") {
  CliResult base = cli({"solve-forms", "--k", "1", "--seed", "5", "--json"});
  {
    EnvGuard guard("BOUTON_FORMS_SEED", "5");
    CliResult env = cli({"solve-forms", "--k", "1", "--json"});
    CHECK(env.out == base.out);
    CliResult flag = cli({"solve-forms", "--k", "1", "--seed", "12345", "--json"});
    CHECK(flag.out != base.out);
  }
  {
    EnvGuard guard("BOUTON_FORMS_SEED", "not-a-number");
    CHECK(cli({"solve-forms", "--k", "1", "--json"}).rc == 2);
  }
}

TEST_CASE("residual and euler check solution files", "[cli]") {
  std::filesystem::path sol = write_temp("bouton_cli_sol2.txt", stagnation_text);
  CliResult r = cli({"residual", "--file", sol.string(), "--json"});
  REQUIRE(r.rc == 0);
  json doc = json::parse(r.out);
  CHECK(doc["all_zero"] == true);
  CHECK(doc["structural"] == true);
  REQUIRE(doc["checks"].size() == 4);
  CHECK(doc["checks"][3]["component"] == "continuity");

  std::filesystem::path bad = write_temp(
      "bouton_cli_bad.txt", "u = x\nv = y\nw = z\np = 0\n");  // divergence 3
  CliResult rb = cli({"residual", "--file", bad.string(), "--json"});
  CHECK(rb.rc == 1);
  json bj = json::parse(rb.out);
  CHECK(bj["all_zero"] == false);

  CliResult e = cli({"euler", "--file", sol.string(), "--json"});
  REQUIRE(e.rc == 0);
  json ej = json::parse(e.out);
  CHECK(ej["time_independent"] == true);
  CHECK(std::string(ej["euler_number"]).find("y^2") != std::string::npos);
}

TEST_CASE("ansatz builds families and verifies their scaling relations", "[cli]") {
  CliResult r = cli({"ansatz", "--family", "self-similar", "--ax", "1", "--at", "2",
                     "--check", "--json"});
  REQUIRE(r.rc == 0);
  json doc = json::parse(r.out);
  CHECK(doc["fields"].contains("u"));
  CHECK(doc["scaling_relations"]["all_zero"] == true);
  CHECK(doc["scaling_relations"]["structural"] == true);

  CliResult cls = cli({"ansatz", "--family", "classical", "--check", "--mode", "split"});
  CHECK(cls.rc == 0);

  json add = json::parse(cli({"ansatz", "--family", "additive", "--ax", "1", "--at",
                              "2", "--doubled-pressure", "--json"})
                             .out);
  CHECK(std::string(add["pressure"]).find("x^2") != std::string::npos);

  CHECK(cli({"ansatz", "--family", "self-similar"}).rc == 2);  // exponents required
  CHECK(cli({"ansatz", "--family", "self-similar", "--ax", "1", "--at", "0"}).rc == 2);
}

TEST_CASE("invariant-args lists the seven joint invariants", "[cli]") {
  CliResult r = cli({"invariant-args", "--json"});
  REQUIRE(r.rc == 0);
  json doc = json::parse(r.out);
  CHECK(doc["count"] == 7);
  CHECK(doc["candidates"] == 3367);
  std::set<std::string> got;
  for (const auto& l : doc["invariants"]) got.insert(std::string(l));
  CHECK(got == std::set<std::string>{"y/x", "z/x", "t*u/x", "t*v/x", "t*w/x",
                                     "t*nu/x^2", "t^2*p/x^2"});
}

TEST_CASE("reproduce runs the property suite deterministically", "[cli]") {
  CliResult a = cli({"reproduce", "--suite", "properties", "--seed", "7", "--json"});
  REQUIRE(a.rc == 0);
  json doc = json::parse(a.out);
  CHECK(doc["suite"] == "properties");
  CHECK(doc["seed"] == 7);
  CHECK(doc["passed"] == true);
  REQUIRE(doc["rows"].size() == 5);
  CHECK(doc["rows"][0]["name"] == "prop-d-squared");

  CliResult b = cli({"reproduce", "--suite", "properties", "--seed", "7", "--json"});
  CHECK(a.out == b.out);
}

TEST_CASE("json output can be directed to a file", "[cli]") {
  std::filesystem::path target =
      std::filesystem::temp_directory_path() / "bouton_cli_out.json";
  std::filesystem::remove(target);
  CliResult r = cli({"classify", "--ax", "1", "--at", "2", "--json", target.string()});
  REQUIRE(r.rc == 0);
  CHECK(r.out.empty());
  std::ifstream in(target);
  REQUIRE(in.good());
  json doc = json::parse(in);
  CHECK(doc["verdict"] == "supercritical");
  std::filesystem::remove(target);
}

TEST_CASE("usage errors exit with code 2 and a diagnostic", "[cli]") {
  CHECK(cli({}).rc == 2);
  CHECK(cli({"nonsense"}).rc == 2);
  CHECK(cli({"classify", "--ax", "1"}).rc == 2);
  CHECK(cli({"classify", "--ax", "0", "--at", "0"}).rc == 2);
  CHECK(cli({"classify", "--ax", "1", "--at", "2", "--bogus"}).rc == 2);
  CHECK(cli({"weights", "--expr", "u^2 +"}).rc == 2);
  CHECK(cli({"weights", "--expr", "u", "--expr", "v"}).rc == 2);  // single use
  CHECK(cli({"apply", "--transform", "spin:z", "--expr", "u"}).rc == 2);
  CHECK(cli({"apply", "--transform", "scale:ax=1", "--expr", "u"}).rc == 2);
  CHECK(cli({"apply", "--transform", "tshift"}).rc == 2);  // missing input
  CHECK(cli({"residual", "--file", "/does/not/exist"}).rc == 2);
  CliResult diag = cli({"classify", "--ax", "x", "--at", "2"});
  CHECK(diag.rc == 2);
  CHECK(diag.out.find("error:") != std::string::npos);

  CliResult help = cli({"--help"});
  CHECK(help.rc == 0);
  CHECK(help.out.find("solve-forms") != std::string::npos);
  CliResult subhelp = cli({"verify-form", "--help"});
  CHECK(subhelp.rc == 0);
  CHECK(subhelp.out.find("--variant") != std::string::npos);
}
