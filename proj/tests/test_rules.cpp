#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "opsem/rules.hpp"

using namespace opsem;

namespace {

MetaVar mv(const char* name, Context params, SortId sort) {
  return MetaVar{name, std::move(params), sort};
}

// Single sort p; evaluation strips the binder: eval relates closed programs
// to bodies in one variable.
DynamicSignature cbn_dsig() {
  DynamicSignature d;
  d.sig = BindingSignature{SortTable::make({"p"}, {}), std::nullopt, {}};
  d.sig.ops.push_back({"lam", 0, {ArgSpec{0, Context{{1}}}}, OpKind::Plain, 0});
  d.sig.ops.push_back(
      {"app", 0, {ArgSpec{0, Context{{0}}}, ArgSpec{0, Context{{0}}}}, OpKind::Plain, 0});
  d.sig.check();
  d.labels.push_back({"eval", 0, Context{{0}}, 0, Context{{1}}});

  MetaVar k1b = mv("k1", Context{{1}}, 0);
  Rule lam_val{"lam-val", 0, op_(d.sig, 0, 0, {meta_(k1b, {var_(0, 1)})}), {},
               meta_(k1b, {var_(0, 1)})};
  d.rules.push_back(lam_val);

  MetaVar k1 = mv("k1", Context{{0}}, 0), k2 = mv("k2", Context{{0}}, 0);
  MetaVar k3 = mv("k3", Context{{1}}, 0), k4 = mv("k4", Context{{1}}, 0);
  Rule beta{"beta", 0, op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k2, {})}), {}, meta_(k4, {var_(0, 1)})};
  beta.premises.push_back({meta_(k1, {}), 0, meta_(k3, {var_(0, 1)})});
  beta.premises.push_back({meta_(k3, {meta_(k2, {})}), 0, meta_(k4, {var_(0, 1)})});
  d.rules.push_back(beta);
  return d;
}

// Counterpart coercion v -> p, binding sort p: value lam (one passive body),
// program app. Classical beta rule plus its rigid compilation live here.
BindingSignature howe_bsig() {
  BindingSignature sig{SortTable::make({"v", "p"}, {Coercion{0, 1, true}}), 1, {}};
  sig.ops.push_back({"lam", 0, {ArgSpec{1, Context{{0, 1}}}}, OpKind::Value, 0});
  sig.ops.push_back(
      {"app", 1, {ArgSpec{1, Context{{0, 0}}}, ArgSpec{1, Context{{0, 0}}}}, OpKind::Program, 0});
  sig.check();
  return sig;
}

Rule howe_beta(const BindingSignature& sig) {
  MetaVar k1 = mv("k1", Context{{0, 0}}, 1), k2 = mv("k2", Context{{0, 0}}, 1);
  MetaVar k3 = mv("k3", Context{{0, 1}}, 1), k4 = mv("k4", Context{{0, 0}}, 0);
  Rule beta{"beta", 0, op_(sig, 1, 1, {meta_(k1, {}), meta_(k2, {})}), {}, meta_(k4, {})};
  beta.premises.push_back({meta_(k1, {}), 0, op_(sig, 0, 0, {meta_(k3, {var_(1, 1)})})});
  beta.premises.push_back({meta_(k3, {meta_(k2, {})}), 0, meta_(k4, {})});
  return beta;
}

DynamicSignature howe_dsig() {
  DynamicSignature d;
  d.sig = howe_bsig();
  d.labels.push_back({"eval", 1, Context{{0, 0}}, 0, Context{{0, 0}}});
  d.howe.push_back(howe_beta(d.sig));
  return d;
}

// Single sort, three operators, a silent step label plus binder-stripping
// evaluation; three schematic closure rules.
DynamicSignature nondet_dsig() {
  DynamicSignature d;
  d.sig = BindingSignature{SortTable::make({"p"}, {}), std::nullopt, {}};
  d.sig.ops.push_back({"lam", 0, {ArgSpec{0, Context{{1}}}}, OpKind::Plain, 0});
  d.sig.ops.push_back(
      {"app", 0, {ArgSpec{0, Context{{0}}}, ArgSpec{0, Context{{0}}}}, OpKind::Plain, 0});
  d.sig.ops.push_back(
      {"amb", 0, {ArgSpec{0, Context{{0}}}, ArgSpec{0, Context{{0}}}}, OpKind::Plain, 0});
  d.sig.check();
  d.labels.push_back({"tau", 0, Context{{0}}, 0, Context{{0}}});
  d.labels.push_back({"eval", 0, Context{{0}}, 0, Context{{1}}});

  Context cl{{0}}, one{{1}};
  MetaVar k1 = mv("k1", cl, 0), k2 = mv("k2", cl, 0), k3 = mv("k3", cl, 0);
  MetaVar b3 = mv("k3", one, 0), b4 = mv("k4", one, 0), b1 = mv("k1", one, 0);

  Rule lam_val{"lam-val", 1, op_(d.sig, 0, 0, {meta_(b1, {var_(0, 1)})}), {},
               meta_(b1, {var_(0, 1)})};
  d.rules.push_back(lam_val);
  Rule beta{"beta", 1, op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k2, {})}), {}, meta_(b4, {var_(0, 1)})};
  beta.premises.push_back({meta_(k1, {}), 1, meta_(b3, {var_(0, 1)})});
  beta.premises.push_back({meta_(b3, {meta_(k2, {})}), 1, meta_(b4, {var_(0, 1)})});
  d.rules.push_back(beta);
  Rule app_left{"app-left", 0, op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k2, {})}), {},
                op_(d.sig, 1, 0, {meta_(k3, {}), meta_(k2, {})})};
  app_left.premises.push_back({meta_(k1, {}), 0, meta_(k3, {})});
  d.rules.push_back(app_left);
  Rule app_right{"app-right", 0, op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k2, {})}), {},
                 op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k3, {})})};
  app_right.premises.push_back({meta_(k2, {}), 0, meta_(k3, {})});
  d.rules.push_back(app_right);
  Rule amb_left{"amb-left", 0, op_(d.sig, 2, 0, {meta_(k1, {}), meta_(k2, {})}), {}, meta_(k1, {})};
  d.rules.push_back(amb_left);
  Rule amb_right{"amb-right", 0, op_(d.sig, 2, 0, {meta_(k1, {}), meta_(k2, {})}), {},
                 meta_(k2, {})};
  d.rules.push_back(amb_right);

  MetaVar x = mv("x", cl, 0), y = mv("y", cl, 0), z = mv("z", cl, 0), w = mv("w", one, 0);
  Rule refl{"refl", 0, meta_(x, {}), {}, meta_(x, {})};
  d.schematic.push_back(refl);
  Rule trans{"trans", 0, meta_(x, {}), {}, meta_(z, {})};
  trans.premises.push_back({meta_(x, {}), 0, meta_(y, {})});
  trans.premises.push_back({meta_(y, {}), 0, meta_(z, {})});
  d.schematic.push_back(trans);
  Rule tte{"tau-then-eval", 1, meta_(x, {}), {}, meta_(w, {var_(0, 1)})};
  tte.premises.push_back({meta_(x, {}), 0, meta_(y, {})});
  tte.premises.push_back({meta_(y, {}), 1, meta_(w, {var_(0, 1)})});
  d.schematic.push_back(tte);
  return d;
}

// Plain coercion v -> p: call-by-value with a coercion-headed value rule.
DynamicSignature cbv_dsig() {
  DynamicSignature d;
  d.sig = BindingSignature{SortTable::make({"v", "p"}, {Coercion{0, 1, false}}), std::nullopt, {}};
  d.sig.ops.push_back({"lam", 0, {ArgSpec{1, Context{{1, 0}}}}, OpKind::Plain, 0});
  d.sig.ops.push_back(
      {"app", 1, {ArgSpec{1, Context{{0, 0}}}, ArgSpec{1, Context{{0, 0}}}}, OpKind::Plain, 0});
  d.sig.check();
  d.labels.push_back({"eval", 1, Context{{0, 0}}, 1, Context{{1, 0}}});

  MetaVar k1b = mv("k1", Context{{1, 0}}, 1);
  Rule lam_val{"lam-val", 0, coerce_(d.sig, op_(d.sig, 0, 0, {meta_(k1b, {var_(0, 1)})})), {},
               meta_(k1b, {var_(0, 1)})};
  d.rules.push_back(lam_val);

  MetaVar k1 = mv("k1", Context{{0, 0}}, 1), k2 = mv("k2", Context{{0, 0}}, 1);
  MetaVar k3 = mv("k3", Context{{1, 0}}, 1), k4 = mv("k4", Context{{1, 0}}, 1);
  MetaVar k5 = mv("k5", Context{{1, 0}}, 1);
  Rule beta{"beta-v", 0, op_(d.sig, 1, 1, {meta_(k1, {}), meta_(k2, {})}), {},
            meta_(k5, {var_(0, 1)})};
  beta.premises.push_back({meta_(k1, {}), 0, meta_(k3, {var_(0, 1)})});
  beta.premises.push_back({meta_(k2, {}), 0, meta_(k4, {var_(0, 1)})});
  beta.premises.push_back(
      {meta_(k3, {op_(d.sig, 0, 0, {meta_(k4, {var_(0, 1)})})}), 0, meta_(k5, {var_(0, 1)})});
  d.rules.push_back(beta);
  return d;
}

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code) {
  for (const Diagnostic& d : ds)
    if (d.code == code) return true;
  return false;
}

const Diagnostic* find_code(const std::vector<Diagnostic>& ds, const std::string& code) {
  for (const Diagnostic& d : ds)
    if (d.code == code) return &d;
  return nullptr;
}

}  // namespace

TEST_CASE("call-by-name rules validate and dispatch by head and label") {
  DynamicSignature d = cbn_dsig();
  ValidationReport rep = validate_signature(d);
  for (const Diagnostic& x : rep.diagnostics) CAPTURE(x.message);
  REQUIRE(rep.ok);
  CHECK(d.validated);
  CHECK(d.expanded.size() == 2);

  REQUIRE(rep.table.size() == 2);
  CHECK(std::get<0>(rep.table[0]) == "lam");
  CHECK(std::get<1>(rep.table[0]) == "eval");
  CHECK(std::get<2>(rep.table[0]) == std::vector<std::string>{"lam-val"});
  CHECK(std::get<0>(rep.table[1]) == "app");
  CHECK(std::get<2>(rep.table[1]) == std::vector<std::string>{"beta"});

  HeadInfo h = head_of(d.sig, d.rules[1]);
  CHECK(h.op == 1);
  CHECK(h.ann == 0);
  CHECK_FALSE(h.coerced);
  CHECK(d.dispatch.at({1, 0, 0}) == std::vector<int>{1});
  CHECK(premise_fresh(d.rules[1].premises[0]).name == "k3");
}

TEST_CASE("coercion-headed value rule validates in the plain flavor") {
  DynamicSignature d = cbv_dsig();
  ValidationReport rep = validate_signature(d);
  for (const Diagnostic& x : rep.diagnostics) CAPTURE(x.message);
  REQUIRE(rep.ok);
  HeadInfo h = head_of(d.sig, d.rules[0]);
  CHECK(h.op == 0);
  CHECK(h.ann == 0);
  CHECK(h.coerced);
  CHECK(d.dispatch.at({0, 0, 0}) == std::vector<int>{0});
  CHECK(d.dispatch.at({1, 1, 0}) == std::vector<int>{1});
}

TEST_CASE("classical premise target trips the format validator") {
  DynamicSignature d;
  d.sig = howe_bsig();
  d.labels.push_back({"eval", 1, Context{{0, 0}}, 0, Context{{0, 0}}});
  d.rules.push_back(howe_beta(d.sig));

  std::vector<Diagnostic> ds = validate_rigid(d, d.rules[0]);
  const Diagnostic* cell = find_code(ds, kNonMetavariableTarget);
  REQUIRE(cell != nullptr);
  CHECK(cell->rule == "beta");
  CHECK(cell->premise == 1);
  CHECK(cell->message == "premise target pattern is not a bare fresh metavariable; rigidify this rule");

  ValidationReport rep = validate_signature(d);
  CHECK_FALSE(rep.ok);
  CHECK(has_code(rep.diagnostics, kNonMetavariableTarget));
  CHECK_FALSE(d.validated);
  CHECK(d.expanded.empty());
}

TEST_CASE("the same rule passes the classical validator and rigidifies") {
  DynamicSignature d = howe_dsig();
  CHECK(validate_howe(d, d.howe[0]).empty());

  RigidifyResult res = rigidify(d);
  REQUIRE(res.dsig.validated);

  REQUIRE(res.dsig.labels.size() == 2);
  CHECK(res.dsig.labels[0].name == "eval");
  CHECK(res.dsig.labels[1].name == "lam-passive-1");
  CHECK(res.dsig.labels[1].src_sort == 0);
  CHECK(res.dsig.labels[1].tgt_sort == 1);
  CHECK(res.dsig.labels[1].tgt_ctx == Context{{0, 1}});

  // beta compiles to: evaluate, extract the body, evaluate the substituted
  // body. Then two canonical lam rules follow.
  REQUIRE(res.dsig.rules.size() == 3);
  const Rule& beta = res.dsig.rules[0];
  CHECK(beta.name == "beta");
  REQUIRE(beta.premises.size() == 3);
  CHECK(premise_fresh(beta.premises[0]).name == "c1");
  CHECK(beta.premises[0].label == 0);
  CHECK(beta.premises[1].label == 1);
  CHECK(equal(beta.premises[1].source, meta_(MetaVar{"c1", Context{{0, 0}}, 0}, {})));
  CHECK(premise_fresh(beta.premises[1]).name == "k3");
  CHECK(beta.premises[2].label == 0);
  CHECK(premise_fresh(beta.premises[2]).name == "k4");

  CHECK(res.dsig.rules[1].name == "lam-eval");
  CHECK(res.dsig.rules[1].premises.empty());
  CHECK(res.dsig.rules[2].name == "lam-passive-1");
  CHECK(equal(res.dsig.rules[2].target, meta_(MetaVar{"b1", Context{{0, 1}}, 1}, {var_(1, 1)})));

  std::vector<std::pair<std::string, std::string>> want{
      {"beta", "beta"}, {"op:lam", "lam-eval"}, {"op:lam", "lam-passive-1"}};
  CHECK(res.mapping == want);
}

TEST_CASE("canonical rule count is one plus actives plus passives") {
  BindingSignature sig{SortTable::make({"v", "p"}, {Coercion{0, 1, true}}), 1, {}};
  sig.ops.push_back({"pair", 0, {ArgSpec{0, Context{{0, 0}}}, ArgSpec{0, Context{{0, 0}}}},
                     OpKind::Value, 2});
  sig.ops.push_back({"unit", 0, {}, OpKind::Value, 0});
  sig.ops.push_back({"lam", 0, {ArgSpec{1, Context{{0, 1}}}}, OpKind::Value, 0});
  sig.ops.push_back(
      {"app", 1, {ArgSpec{1, Context{{0, 0}}}, ArgSpec{1, Context{{0, 0}}}}, OpKind::Program, 0});
  sig.check();

  std::vector<Label> labels = howe_label_set(sig);
  REQUIRE(labels.size() == 4);
  CHECK(labels[1].name == "pair-active-1");
  CHECK(labels[2].name == "pair-active-2");
  CHECK(labels[3].name == "lam-passive-1");

  std::vector<Rule> rules = canonical_rules(sig, labels);
  auto count = [&](const std::string& prefix) {
    int n = 0;
    for (const Rule& r : rules)
      if (r.name.rfind(prefix, 0) == 0) ++n;
    return n;
  };
  CHECK(count("pair-") == 3);
  CHECK(count("unit-") == 1);
  CHECK(count("lam-") == 2);
  CHECK(rules.size() == 6);

  const Rule& pe = rules[0];
  CHECK(pe.name == "pair-eval");
  REQUIRE(pe.premises.size() == 2);
  CHECK(equal(pe.premises[0].source, meta_(MetaVar{"k1", Context{{0, 0}}, 1}, {})));
  CHECK(pe.premises[1].label == 0);
  CHECK(pe.target->tag == Tag::Op);
  CHECK(pe.target->sort == 0);
}

TEST_CASE("schematic closure rules expand once per constructor") {
  DynamicSignature d = nondet_dsig();
  std::vector<Rule> refl = expand_schematic(d, d.schematic[0]);
  REQUIRE(refl.size() == 3);
  CHECK(refl[0].name == "refl-lam");
  CHECK(refl[1].name == "refl-app");
  CHECK(refl[2].name == "refl-amb");

  // the head wildcard is replaced consistently in source and target
  CHECK(equal(refl[0].source, refl[0].target));
  CHECK(refl[0].source->tag == Tag::Op);
  CHECK(refl[0].source->index == 0);
  CHECK(refl[0].source->args[0]->tag == Tag::Meta);
  CHECK(refl[0].source->args[0]->mv->name == "x1");
  CHECK(refl[0].source->args[0]->mv->params == Context{{1}});

  std::vector<Rule> trans = expand_schematic(d, d.schematic[1]);
  REQUIRE(trans.size() == 3);
  CHECK(trans[1].name == "trans-app");
  CHECK(trans[1].premises.size() == 2);
  CHECK(trans[1].source->tag == Tag::Op);
  CHECK(equal(trans[1].premises[0].source, trans[1].source));
  CHECK(trans[1].premises[1].source->tag == Tag::Meta);

  for (const Rule& r : refl) CHECK(validate_rigid(d, r).empty());
  for (const Rule& r : trans) CHECK(validate_rigid(d, r).empty());
}

TEST_CASE("expansion covers plain coercion constructor forms") {
  DynamicSignature d;
  d.sig = BindingSignature{SortTable::make({"v", "p"}, {Coercion{0, 1, false}}), std::nullopt, {}};
  d.sig.ops.push_back({"lam", 0, {ArgSpec{1, Context{{1, 0}}}}, OpKind::Plain, 0});
  d.sig.ops.push_back(
      {"app", 1, {ArgSpec{1, Context{{0, 0}}}, ArgSpec{1, Context{{0, 0}}}}, OpKind::Plain, 0});
  d.sig.check();
  d.labels.push_back({"tau", 1, Context{{0, 0}}, 1, Context{{0, 0}}});
  MetaVar x = mv("x", Context{{0, 0}}, 1);
  d.schematic.push_back({"refl", 0, meta_(x, {}), {}, meta_(x, {})});

  std::vector<Rule> ex = expand_schematic(d, d.schematic[0]);
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].name == "refl-app");
  CHECK(ex[1].name == "refl-coerce");
  CHECK(ex[1].source->tag == Tag::Coerce);
  CHECK(ex[1].source->args[0]->tag == Tag::Meta);
  CHECK(ex[1].source->args[0]->mv->sort == 0);
  for (const Rule& r : ex) CHECK(validate_rigid(d, r).empty());
}

TEST_CASE("nondeterministic table counts match the closure expansion") {
  DynamicSignature d = nondet_dsig();
  ValidationReport rep = validate_signature(d);
  for (const Diagnostic& x : rep.diagnostics) CAPTURE(x.message);
  REQUIRE(rep.ok);
  CHECK(d.expanded.size() == 15);

  std::map<std::pair<std::string, std::string>, int> counts;
  for (const auto& [op, label, names] : rep.table)
    counts[{op, label}] = static_cast<int>(names.size());
  CHECK(counts.at({"lam", "eval"}) == 2);
  CHECK(counts.at({"app", "eval"}) == 2);
  CHECK(counts.at({"amb", "eval"}) == 1);
  CHECK(counts.at({"lam", "tau"}) == 2);
  CHECK(counts.at({"app", "tau"}) == 4);
  CHECK(counts.at({"amb", "tau"}) == 4);
}

TEST_CASE("format defects are reported with stable codes") {
  DynamicSignature d = cbn_dsig();

  SUBCASE("unintroduced metavariable in a premise source") {
    Rule bad = d.rules[1];
    MetaVar k9 = mv("k9", Context{{0}}, 0);
    bad.premises[1].source = meta_(k9, {});
    bad.name = "bad";
    std::vector<Diagnostic> ds = validate_rigid(d, bad);
    const Diagnostic* u = find_code(ds, "unintroduced-metavariable");
    REQUIRE(u != nullptr);
    CHECK(u->premise == 2);
    CHECK(u->message ==
          "premise source mentions metavariable k9 before any premise introduces it");
  }

  SUBCASE("unintroduced metavariable in the conclusion target") {
    Rule bad = d.rules[0];
    bad.name = "bad";
    bad.target = meta_(mv("zz", Context{{1}}, 0), {var_(0, 1)});
    std::vector<Diagnostic> ds = validate_rigid(d, bad);
    CHECK(has_code(ds, "unintroduced-metavariable"));
  }

  SUBCASE("metavariable reused at a different parameter context") {
    Rule bad = d.rules[1];
    bad.name = "bad";
    bad.premises[1].source = meta_(mv("k3", Context{{0}}, 0), {});
    std::vector<Diagnostic> ds = validate_rigid(d, bad);
    CHECK(has_code(ds, "metavariable-mismatch"));
  }

  SUBCASE("premise target with wrong parameter context") {
    Rule bad = d.rules[1];
    bad.name = "bad";
    bad.premises[0].target = meta_(mv("k3", Context{{0}}, 0), {});
    std::vector<Diagnostic> ds = validate_rigid(d, bad);
    CHECK(has_code(ds, kNonMetavariableTarget));
  }

  SUBCASE("premise target reusing an introduced name") {
    Rule bad = d.rules[1];
    bad.name = "bad";
    bad.premises[1].target = meta_(mv("k3", Context{{1}}, 0), {var_(0, 1)});
    std::vector<Diagnostic> ds = validate_rigid(d, bad);
    CHECK(has_code(ds, "reused-metavariable"));
  }

  SUBCASE("non-generic head") {
    MetaVar k1 = mv("k1", Context{{0}}, 0);
    Rule bad{"bad", 0, op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k1, {})}), {}, meta_(k1, {})};
    std::vector<Diagnostic> ds = validate_rigid(d, bad);
    CHECK(has_code(ds, "non-generic-head"));
  }

  SUBCASE("undeclared label") {
    Rule bad = d.rules[0];
    bad.name = "bad";
    bad.label = 7;
    CHECK(has_code(validate_rigid(d, bad), "undeclared-label"));
  }

  SUBCASE("duplicate rule names fail the signature") {
    d.rules.push_back(d.rules[0]);
    ValidationReport rep = validate_signature(d);
    CHECK_FALSE(rep.ok);
    CHECK(has_code(rep.diagnostics, "duplicate-rule-name"));
  }

  SUBCASE("schematic rules need a closed source context") {
    MetaVar x = mv("x", Context{{1}}, 0);
    d.labels.push_back({"open", 0, Context{{1}}, 0, Context{{1}}});
    Rule s{"s", 1, meta_(x, {var_(0, 1)}), {}, meta_(x, {var_(0, 1)})};
    CHECK(has_code(validate_schematic(d, s), "open-schematic-context"));
    CHECK_THROWS_AS(expand_schematic(d, s), StructuralError);
  }
}

TEST_CASE("empty rule set validates") {
  DynamicSignature d;
  d.sig = BindingSignature{SortTable::make({"p"}, {}), std::nullopt, {}};
  d.sig.ops.push_back({"c", 0, {}, OpKind::Plain, 0});
  d.sig.check();
  d.labels.push_back({"eval", 0, Context{{0}}, 0, Context{{0}}});
  ValidationReport rep = validate_signature(d);
  CHECK(rep.ok);
  CHECK(rep.table.empty());
  CHECK(d.validated);
}

TEST_CASE("rigidified output always passes the rigid validator") {
  BindingSignature sig = howe_bsig();
  std::mt19937_64 rng(20260819);
  auto draw = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };

  for (int trial = 0; trial < 40; ++trial) {
    DynamicSignature d;
    d.sig = sig;
    d.labels.push_back({"eval", 1, Context{{0, 0}}, 0, Context{{0, 0}}});

    MetaVar k1 = mv("k1", Context{{0, 0}}, 1), k2 = mv("k2", Context{{0, 0}}, 1);
    Rule r{"r", 0, op_(sig, 1, 1, {meta_(k1, {}), meta_(k2, {})}), {}, {}};
    std::vector<MetaVar> programs{k1, k2};  // closed program metavariables
    std::vector<MetaVar> values;            // closed value metavariables
    std::vector<MetaVar> bodies;            // program metavariables in one binder

    int next = 3;
    auto program_atom = [&]() -> Term {
      int pick = draw(static_cast<int>(programs.size() + values.size()));
      if (pick < static_cast<int>(programs.size())) return meta_(programs[pick], {});
      return coerce_(sig, meta_(values[pick - programs.size()], {}));
    };
    auto source = [&]() -> Term {
      int shape = draw(bodies.empty() ? 2 : 3);
      if (shape == 0) return program_atom();
      if (shape == 1) return op_(sig, 1, 1, {program_atom(), program_atom()});
      return meta_(bodies[draw(static_cast<int>(bodies.size()))], {program_atom()});
    };

    int npre = 1 + draw(3);
    for (int p = 0; p < npre; ++p) {
      Term src = source();
      bool op_target = draw(2) == 0;
      if (op_target) {
        MetaVar body{"k" + std::to_string(next++), Context{{0, 1}}, 1};
        r.premises.push_back({src, 0, op_(sig, 0, 0, {meta_(body, {var_(1, 1)})})});
        bodies.push_back(body);
      } else {
        MetaVar v{"k" + std::to_string(next++), Context{{0, 0}}, 0};
        r.premises.push_back({src, 0, meta_(v, {})});
        values.push_back(v);
      }
    }
    if (values.empty()) {
      MetaVar v{"k" + std::to_string(next++), Context{{0, 0}}, 0};
      r.premises.push_back({source(), 0, meta_(v, {})});
      values.push_back(v);
    }
    r.target = meta_(values[draw(static_cast<int>(values.size()))], {});

    d.howe.push_back(r);
    CAPTURE(trial);
    REQUIRE(validate_howe(d, d.howe[0]).empty());

    RigidifyResult res = rigidify(d);
    CHECK(res.dsig.validated);
    for (const Rule& out : res.dsig.rules) CHECK(validate_rigid(res.dsig, out).empty());
  }
}
