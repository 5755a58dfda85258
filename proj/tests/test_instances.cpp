#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "opsem/bisim.hpp"
#include "opsem/eval.hpp"
#include "opsem/instances.hpp"

using namespace opsem;

namespace {

// Direct single-sorted terms embed into the value-passive presentation:
// program variables map to the program supply, operators keep their index.
Term to_passive(const BindingSignature& hsig, const Term& t) {
  switch (t->tag) {
    case Tag::Var:
      return var_(1, t->index);
    case Tag::Op: {
      std::vector<Term> args;
      for (const Term& a : t->args) args.push_back(to_passive(hsig, a));
      return op_(hsig, t->index, 1, std::move(args));
    }
    default:
      throw StructuralError("unexpected term shape in embedding");
  }
}

Term ident(const BindingSignature& sig) { return op_(sig, 0, 0, {var_(0, 1)}); }

}  // namespace

TEST_CASE("the catalog lists four validated instances with counts") {
  std::vector<InstanceInfo> cat = catalog();
  REQUIRE(cat.size() == 4);
  CHECK(cat[0].name == "cbn");
  CHECK(cat[1].name == "cbv");
  CHECK(cat[2].name == "nondet");
  CHECK(cat[3].name == "cbn-howe");
  for (const InstanceInfo& info : cat) {
    DynamicSignature d = load_instance(info.name);
    CHECK(validate_signature(d).ok);
    CHECK(info.summary.find("operators") != std::string::npos);
    CHECK(info.summary.find("rule") != std::string::npos);
    CHECK(info.default_pool_size == 3);
  }
  CHECK(cat[1].values_only);
  CHECK(cat[3].values_only);
  CHECK_FALSE(cat[0].values_only);
  CHECK(cat[0].has_step_oracle);
  CHECK(cat[2].has_step_oracle);
  CHECK_FALSE(cat[1].has_step_oracle);
  CHECK_THROWS_AS(load_instance("pcf"), StructuralError);
}

TEST_CASE("call-by-name evaluation matches the canonical examples") {
  DynamicSignature d = load_instance("cbn");
  REQUIRE(d.labels.size() == 1);
  CHECK(d.labels[0].name == "eval");
  Term id = ident(d.sig);
  TransitionSet lam = transitions(d, id, 0, 1);
  REQUIRE(lam.targets.size() == 1);
  CHECK(equal(lam.targets[0], var_(0, 1)));
  CHECK_FALSE(lam.fuel_exhausted);
  TransitionSet beta = transitions(d, op_(d.sig, 1, 0, {id, id}), 0, 3);
  REQUIRE(beta.targets.size() == 1);
  CHECK(equal(beta.targets[0], var_(0, 1)));
  CHECK_FALSE(beta.fuel_exhausted);
}

TEST_CASE("call-by-value carries the three-premise application rule") {
  DynamicSignature d = load_instance("cbv");
  REQUIRE(d.rules.size() == 2);
  CHECK(d.rules[0].source->tag == Tag::Coerce);
  const Rule& beta = d.rules[1];
  REQUIRE(beta.premises.size() == 3);
  // the third premise substitutes the abstraction of the second target
  const Term& chained = beta.premises[2].source;
  REQUIRE(chained->tag == Tag::Meta);
  REQUIRE(chained->args.size() == 1);
  CHECK(chained->args[0]->tag == Tag::Op);
  CHECK(chained->args[0]->index == 0);
  CHECK(chained->args[0]->args[0]->tag == Tag::Meta);

  Term iv = op_(d.sig, 0, 0, {coerce_(d.sig, var_(0, 1))});
  Term ip = coerce_(d.sig, iv);
  TransitionSet ts = transitions(d, op_(d.sig, 1, 1, {ip, ip}), 0, 3);
  REQUIRE(ts.targets.size() == 1);
  CHECK(equal(ts.targets[0], coerce_(d.sig, var_(0, 1))));
}

TEST_CASE("the choice instance expands to the published rule table") {
  DynamicSignature d = load_instance("nondet");
  REQUIRE(d.labels.size() == 2);
  CHECK(d.labels[0].name == "eval");
  CHECK(d.labels[1].name == "tau");
  CHECK(d.rules.size() == 6);
  CHECK(d.schematic.size() == 3);
  ValidationReport rep = validate_signature(d);
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

  Term id = ident(d.sig);
  Term t = op_(d.sig, 2, 0, {id});
  TransitionSet tau = transitions(d, t, 1, 4);
  REQUIRE(tau.targets.size() == 3);
  auto has = [&](const Term& u) {
    return std::any_of(tau.targets.begin(), tau.targets.end(),
                       [&](const Term& x) { return equal(x, u); });
  };
  CHECK(has(id));
  CHECK(has(omega(d.sig)));
  CHECK(has(t));
}

TEST_CASE("bounded reachability agrees with the step oracle on small terms") {
  DynamicSignature d = load_instance("nondet");
  EvalSession es(d);
  for (const Term& t : enumerate_terms(d.sig, 0, d.sig.empty_context(), 4)) {
    OracleResult oracle = small_step_oracle(d, t, 6);
    if (!oracle.complete) continue;
    TransitionSet ts = es.transitions(t, 1, 6);
    for (const Term& u : ts.targets) {
      bool found = std::any_of(oracle.reachable.begin(), oracle.reachable.end(),
                               [&](const Term& r) { return equal(r, u); });
      CHECK(found);
    }
  }
}

TEST_CASE("the value-passive presentation tracks the direct one") {
  DynamicSignature cbn = load_instance("cbn");
  RigidifyResult rr = rigidify(load_instance("cbn-howe"));
  REQUIRE(validate_signature(rr.dsig).ok);
  const DynamicSignature& howe = rr.dsig;
  REQUIRE(howe.labels.size() == 2);

  SubstPool cpool = make_pool(cbn.sig, 3, false);
  SubstPool hpool = make_pool(howe.sig, 3, true);
  REQUIRE(hpool.by_sort[1].size() == cpool.by_sort[0].size());

  std::vector<Term> universe = enumerate_terms(cbn.sig, 0, cbn.sig.empty_context(), 5);
  REQUIRE(universe.size() == 20);
  BisimSession cs(cbn, cpool, 8);
  BisimSession hs(howe, hpool, 8);

  // composing evaluation with the value-passive label recovers direct
  // evaluation, target for target
  for (const Term& t : universe) {
    TransitionSet direct = cs.eval().transitions(t, 0, 8);
    TransitionSet ev = hs.eval().transitions(to_passive(howe.sig, t), 0, 8);
    CHECK(direct.fuel_exhausted == ev.fuel_exhausted);
    std::vector<Term> composed;
    for (const Term& v : ev.targets)
      for (const Term& b : hs.eval().transitions(v, 1, 8).targets) {
        bool dup = std::any_of(composed.begin(), composed.end(),
                               [&](const Term& x) { return equal(x, b); });
        if (!dup) composed.push_back(b);
      }
    REQUIRE(composed.size() == direct.targets.size());
    for (const Term& u : direct.targets) {
      Term mapped = to_passive(howe.sig, u);
      bool found = std::any_of(composed.begin(), composed.end(),
                               [&](const Term& x) { return equal(x, mapped); });
      CHECK(found);
    }
  }

  // one direct observation round costs two in the value-passive system
  int disagreements = 0;
  for (const Term& a : universe)
    for (const Term& b : universe) {
      Verdict vc = cs.check(a, b, 3);
      Verdict vh = hs.check(to_passive(howe.sig, a), to_passive(howe.sig, b), 6);
      if (vc.kind != vh.kind) ++disagreements;
    }
  CHECK(disagreements == 0);
}
