#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "opsem/cli.hpp"

using namespace opsem;
using nlohmann::json;

namespace {

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

std::string corpus(const std::string& name) {
  return std::string(OPSEM_CORPUS_DIR) + "/" + name;
}

std::string temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream f(path);
  f << content;
  return path.string();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("eval prints targets and completion") {
  CliResult r = run({"eval", corpus("cbn.sig"), "app(lam(x. x), lam(y. y))", "--label", "eval",
                     "--fuel", "3"});
  CHECK(r.status == 0);
  CHECK(contains(r.out, "=> p1"));
  CHECK(contains(r.out, "complete"));
  CHECK(r.err.empty());
}

TEST_CASE("eval reports fuel exhaustion") {
  CliResult r = run({"eval", corpus("cbn.sig"), "app(lam(x. app(x, x)), lam(x. app(x, x)))",
                     "--label", "eval", "--fuel", "10"});
  CHECK(r.status == 2);
  CHECK(contains(r.out, "fuel exhausted"));
  CHECK(!contains(r.out, "=>"));
}

TEST_CASE("eval trace renders the derivation tree") {
  CliResult r = run({"eval", corpus("cbn.sig"), "app(lam(x. x), lam(y. y))", "--label", "eval",
                     "--fuel", "3", "--trace"});
  CHECK(r.status == 0);
  CHECK(contains(r.out, "beta: app(lam(p1. p1), lam(p1. p1)) =eval=> p1"));
  CHECK(contains(r.out, "  lam-val: lam(p1. p1) =eval=> p1"));
}

TEST_CASE("eval trace json carries nested premises") {
  CliResult r = run({"eval", corpus("cbn.sig"), "app(lam(x. x), lam(y. y))", "--label", "eval",
                     "--fuel", "3", "--trace", "--json"});
  CHECK(r.status == 0);
  json j = json::parse(r.out);
  CHECK(j["command"] == "eval");
  CHECK(j["targets"] == json::array({"p1"}));
  CHECK(j["fuel_exhausted"] == false);
  REQUIRE(j["derivations"].size() == 1);
  CHECK(j["derivations"][0]["rule"] == "beta");
  CHECK(j["derivations"][0]["premises"].size() == 2);
  bool saw_trace = false;
  for (const auto& a : j["argv"])
    if (a == "--trace") saw_trace = true;
  CHECK(saw_trace);
}

TEST_CASE("eval rejects unknown labels") {
  CliResult r = run({"eval", corpus("cbn.sig"), "lam(x. x)", "--label", "nope"});
  CHECK(r.status == 3);
  CHECK(contains(r.err, "unknown label nope"));
}

TEST_CASE("term parse errors carry a location") {
  CliResult r = run({"eval", corpus("cbn.sig"), "oops", "--label", "eval"});
  CHECK(r.status == 3);
  CHECK(contains(r.err, "line 1, column 1: unknown name oops"));
}

TEST_CASE("bisim holds on a beta-convertible value pair") {
  CliResult r = run({"bisim", corpus("cbv.sig"), "lam(x. lam(y. y))",
                     "lam(x. app(lam(y. lam(z. z)), x))", "--depth", "4", "--values-only"});
  CHECK(r.status == 0);
  CHECK(contains(r.out, "verdict: holds"));
}

TEST_CASE("bisim reports inconclusive with a trail") {
  CliResult r = run({"bisim", corpus("nondet.sig"), "amb(lam(x. x))", "lam(x. x)", "--depth",
                     "2", "--fuel", "6"});
  CHECK(r.status == 2);
  CHECK(contains(r.out, "verdict: inconclusive"));
  CHECK(contains(r.out, "amb(lam(p1. p1)) ~ lam(p1. p1) =eval=> ?"));
}

TEST_CASE("bisim json echoes the invocation") {
  CliResult r = run({"bisim", corpus("cbv.sig"), "lam(x. lam(y. y))",
                     "lam(x. app(lam(y. lam(z. z)), x))", "--depth", "4", "--values-only",
                     "--json"});
  CHECK(r.status == 0);
  json j = json::parse(r.out);
  CHECK(j["command"] == "bisim");
  CHECK(j["verdict"] == "holds");
  CHECK(j["argv"][0] == "bisim");
  CHECK(j["argv"].size() >= 5);
}

TEST_CASE("validate accepts a cellular rule set and prints the dispatch table") {
  CliResult r = run({"validate", corpus("cbn.sig")});
  CHECK(r.status == 0);
  CHECK(contains(r.out, "ok: 2 rules, 1 labels"));
  CHECK(contains(r.out, "lam =eval=> lam-val"));
  CHECK(contains(r.out, "app =eval=> beta"));
}

TEST_CASE("validate rejects non-rigid premises with named diagnostics") {
  CliResult r = run({"validate", corpus("cbn-howe-naive.sig")});
  CHECK(r.status == 1);
  CHECK(contains(r.out, "non-metavariable-target-pattern"));
  CHECK(contains(r.out, "rigidify"));
  CHECK(contains(r.out, "unintroduced-metavariable"));
}

TEST_CASE("validate json diagnostics name the rule and premise") {
  CliResult r = run({"validate", corpus("cbn-howe-naive.sig"), "--json"});
  CHECK(r.status == 1);
  json j = json::parse(r.out);
  CHECK(j["ok"] == false);
  REQUIRE(j["diagnostics"].size() == 2);
  CHECK(j["diagnostics"][0]["code"] == "non-metavariable-target-pattern");
  CHECK(j["diagnostics"][0]["rule"] == "beta");
  CHECK(j["diagnostics"][0]["premise"] == 1);
}

TEST_CASE("rigidify writes a signature that validates") {
  std::string out_path =
      (std::filesystem::temp_directory_path() / "opsem_cli_rigid.sig").string();
  CliResult r = run({"rigidify", corpus("cbn-howe.sig"), "-o", out_path});
  CHECK(r.status == 0);
  CHECK(contains(r.out, "3 rules, 2 labels"));
  CHECK(contains(r.out, "beta => beta"));
  CHECK(contains(r.out, "op:lam => lam-eval"));
  CHECK(contains(r.out, "op:lam => lam-passive-1"));

  CliResult v = run({"validate", out_path});
  CHECK(v.status == 0);
  CHECK(contains(v.out, "ok: 3 rules, 2 labels"));
  CHECK(contains(v.out, "lam@v =lam-passive-1=> lam-passive-1"));

  std::ifstream f(out_path);
  std::ostringstream os;
  os << f.rdbuf();
  CHECK(contains(os.str(), "label lam-passive-1"));
}

TEST_CASE("check-rel certifies a closed diagonal relation") {
  std::string rel = temp_file("opsem_cli_diag.txt",
                              "pairs p@0\n"
                              "lam(p1. p1) ~ lam(p1. p1)\n"
                              "lam(p1. lam(p2. p1)) ~ lam(p1. lam(p2. p1))\n"
                              "lam(p1. lam(p2. p2)) ~ lam(p1. lam(p2. p2))\n"
                              "lam(p1. lam(p2. lam(p3. p2))) ~ lam(p1. lam(p2. lam(p3. p2)))\n"
                              "lam(p1. lam(p2. lam(p3. p3))) ~ lam(p1. lam(p2. lam(p3. p3)))\n");
  CliResult r = run({"check-rel", corpus("cbn.sig"), rel, "--fuel", "8", "--pool-size", "3"});
  CHECK(r.status == 0);
  CHECK(contains(r.out, "bisimulation: yes"));
}

TEST_CASE("check-rel pinpoints pairs whose targets escape the relation") {
  std::string rel = temp_file("opsem_cli_single.txt",
                              "pairs p@0\n"
                              "lam(p1. p1) ~ lam(p1. app(lam(p2. p2), p1))\n");
  CliResult r = run({"check-rel", corpus("cbn.sig"), rel, "--fuel", "8", "--pool-size", "3"});
  CHECK(r.status == 1);
  CHECK(contains(r.out, "bisimulation: no"));
  CHECK(contains(r.out, "definite=2"));
  CHECK(contains(r.out, "=eval=> p1"));

  CliResult j = run({"check-rel", corpus("cbn.sig"), rel, "--fuel", "8", "--pool-size", "3",
                     "--json"});
  CHECK(j.status == 1);
  json rep = json::parse(j.out);
  CHECK(rep["bisimulation"] == false);
  CHECK(rep["definite"] == 2);
  REQUIRE(rep["issues"].size() == 2);
  CHECK(rep["issues"][0]["definite"] == true);
  CHECK(rep["issues"][0]["left"] == "lam(p1. p1)");
  CHECK(rep["issues"][0]["closing"].contains("p1"));
  CHECK(rep["issues"][0]["escaped"].size() == 2);
}

TEST_CASE("howe sweep prints the suite summary and flags findings") {
  CliResult r = run({"howe", corpus("cbn.sig"), "--size", "4", "--depth", "3"});
  CHECK(r.status == 2);
  CHECK(contains(r.out, "universe: 100 terms in 6 blocks"));
  CHECK(contains(r.out, "closure: 2478 pairs in 5 passes"));
  CHECK(contains(r.out, "step additions: 0"));
  CHECK(contains(r.out, "composition: ok (checked 76636)"));
  CHECK(contains(r.out, "substitution: ok (applied 122, skipped 78)"));
  CHECK(contains(r.out, "symmetry of transitive closure: ok"));
  CHECK(contains(r.out, "simulation: definite=0 inconclusive=24"));
}

TEST_CASE("howe basic checks stop after composition") {
  CliResult r = run({"howe", corpus("cbn.sig"), "--size", "4", "--depth", "3", "--checks",
                     "basic"});
  CHECK(r.status == 0);
  CHECK(contains(r.out, "composition: ok (checked 76636)"));
  CHECK(!contains(r.out, "simulation:"));
}

TEST_CASE("howe json embeds the per-check reports") {
  CliResult r = run({"howe", corpus("cbn.sig"), "--size", "4", "--depth", "3", "--json"});
  CHECK(r.status == 2);
  json j = json::parse(r.out);
  CHECK(j["universe"]["terms"] == 100);
  CHECK(j["universe"]["blocks"] == 6);
  CHECK(j["closure"]["pairs"] == 2478);
  CHECK(j["closure"]["fixpoint"]["iterations"] == 5);
  CHECK(j["step_additions"] == 0);
  CHECK(j["composition"]["ok"] == true);
  CHECK(j["composition"]["checked"] == 76636);
  CHECK(j["substitution"]["applied"] == 122);
  CHECK(j["substitution"]["skipped"] == 78);
  CHECK(j["symmetry"]["ok"] == true);
  CHECK(j["simulation"]["definite"] == 0);
  CHECK(j["simulation"]["inconclusive"] == 24);
  CHECK(j["ok"] == true);
}

TEST_CASE("congruence sweep holds on seeded samples") {
  CliResult r = run({"congruence", corpus("cbn.sig"), "--samples", "50"});
  CHECK(r.status == 0);
  CHECK(contains(r.out, "pairs=400 contexts=25 samples=50 holds=50 inconclusive=0"));
  CHECK(contains(r.out, "counterexamples=0"));

  CliResult j = run({"congruence", corpus("cbn.sig"), "--samples", "50", "--json"});
  json rep = json::parse(j.out);
  CHECK(rep["ok"] == true);
  CHECK(rep["report"]["samples"] == 50);
  CHECK(rep["report"]["holds"] == 50);
  CHECK(rep["report"]["pair_population"] == 400);
  CHECK(rep["report"]["counterexamples"].empty());
}

TEST_CASE("enumerate lists terms of a sort in context") {
  CliResult r = run({"enumerate", corpus("cbn.sig"), "--sort", "p", "--ctx", "1 p", "--size",
                     "3"});
  CHECK(r.status == 0);
  CHECK(count_lines(r.out) == 7);
  CHECK(r.out.substr(0, 3) == "p1\n");
  CHECK(contains(r.out, "app(p1, p1)"));
  CHECK(contains(r.out, "lam(p2. lam(p3. p1))"));
}

TEST_CASE("enumerate rejects unknown sorts") {
  CliResult r = run({"enumerate", corpus("cbn.sig"), "--sort", "q", "--size", "2"});
  CHECK(r.status == 3);
  CHECK(contains(r.err, "unknown sort q"));
}

TEST_CASE("signature file diagnostics carry path and location") {
  std::string bad = temp_file("opsem_cli_bad.sig", "sort v\nbogus z\n");
  CliResult r = run({"validate", bad});
  CHECK(r.status == 3);
  CHECK(contains(r.err, ":2:7: unknown directive bogus"));
}

TEST_CASE("missing files are reported as usage errors") {
  CliResult r = run({"validate", "/nonexistent/file.sig"});
  CHECK(r.status == 3);
  CHECK(contains(r.err, "cannot open"));
}

TEST_CASE("missing subcommand and unknown flags exit with usage status") {
  CHECK(run({}).status == 3);
  CHECK(run({"validate", corpus("cbn.sig"), "--frobnicate"}).status == 3);
}

TEST_CASE("json flag parses before and after the subcommand") {
  CliResult a = run({"--json", "validate", corpus("cbn.sig")});
  CliResult b = run({"validate", corpus("cbn.sig"), "--json"});
  CHECK(a.status == 0);
  CHECK(b.status == 0);
  CHECK(json::parse(a.out)["command"] == "validate");
  CHECK(json::parse(b.out)["command"] == "validate");
}
