#include "opsem/instances.hpp"

#include <stdexcept>

#include "opsem/eval.hpp"

namespace opsem {

namespace {

MetaVar mv(const char* name, Context params, SortId sort) {
  return MetaVar{name, std::move(params), sort};
}

DynamicSignature make_cbn() {
  DynamicSignature d;
  d.sig = BindingSignature{SortTable::make({"p"}, {}), std::nullopt, {}};
  d.sig.ops.push_back({"lam", 0, {ArgSpec{0, Context{{1}}}}, OpKind::Plain, 0});
  d.sig.ops.push_back(
      {"app", 0, {ArgSpec{0, Context{{0}}}, ArgSpec{0, Context{{0}}}}, OpKind::Plain, 0});
  d.sig.check();
  d.labels.push_back({"eval", 0, Context{{0}}, 0, Context{{1}}});
  MetaVar b = mv("k1", Context{{1}}, 0);
  d.rules.push_back(
      {"lam-val", 0, op_(d.sig, 0, 0, {meta_(b, {var_(0, 1)})}), {}, meta_(b, {var_(0, 1)})});
  MetaVar k1 = mv("k1", Context{{0}}, 0), k2 = mv("k2", Context{{0}}, 0);
  MetaVar k3 = mv("k3", Context{{1}}, 0), k4 = mv("k4", Context{{1}}, 0);
  Rule beta{"beta", 0, op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k2, {})}), {},
            meta_(k4, {var_(0, 1)})};
  beta.premises.push_back({meta_(k1, {}), 0, meta_(k3, {var_(0, 1)})});
  beta.premises.push_back({meta_(k3, {meta_(k2, {})}), 0, meta_(k4, {var_(0, 1)})});
  d.rules.push_back(beta);
  return d;
}

DynamicSignature make_cbv() {
  DynamicSignature d;
  d.sig = BindingSignature{SortTable::make({"v", "p"}, {Coercion{0, 1, false}}), std::nullopt, {}};
  d.sig.ops.push_back({"lam", 0, {ArgSpec{1, Context{{1, 0}}}}, OpKind::Plain, 0});
  d.sig.ops.push_back(
      {"app", 1, {ArgSpec{1, Context{{0, 0}}}, ArgSpec{1, Context{{0, 0}}}}, OpKind::Plain, 0});
  d.sig.check();
  d.labels.push_back({"eval", 1, Context{{0, 0}}, 1, Context{{1, 0}}});
  MetaVar b = mv("k1", Context{{1, 0}}, 1);
  d.rules.push_back({"lam-val", 0, coerce_(d.sig, op_(d.sig, 0, 0, {meta_(b, {var_(0, 1)})})),
                     {}, meta_(b, {var_(0, 1)})});
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

DynamicSignature make_nondet() {
  DynamicSignature d;
  d.sig = BindingSignature{SortTable::make({"p"}, {}), std::nullopt, {}};
  d.sig.ops.push_back({"lam", 0, {ArgSpec{0, Context{{1}}}}, OpKind::Plain, 0});
  d.sig.ops.push_back(
      {"app", 0, {ArgSpec{0, Context{{0}}}, ArgSpec{0, Context{{0}}}}, OpKind::Plain, 0});
  d.sig.ops.push_back({"amb", 0, {ArgSpec{0, Context{{0}}}}, OpKind::Plain, 0});
  d.sig.check();
  d.labels.push_back({"eval", 0, Context{{0}}, 0, Context{{1}}});
  d.labels.push_back({"tau", 0, Context{{0}}, 0, Context{{0}}});

  Context cl{{0}}, one{{1}};
  MetaVar k1 = mv("k1", cl, 0), k2 = mv("k2", cl, 0), k3 = mv("k3", cl, 0);
  MetaVar b1 = mv("k1", one, 0), b3 = mv("k3", one, 0), b4 = mv("k4", one, 0);
  d.rules.push_back(
      {"lam-val", 0, op_(d.sig, 0, 0, {meta_(b1, {var_(0, 1)})}), {}, meta_(b1, {var_(0, 1)})});
  Rule beta{"beta", 0, op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k2, {})}), {},
            meta_(b4, {var_(0, 1)})};
  beta.premises.push_back({meta_(k1, {}), 0, meta_(b3, {var_(0, 1)})});
  beta.premises.push_back({meta_(b3, {meta_(k2, {})}), 0, meta_(b4, {var_(0, 1)})});
  d.rules.push_back(beta);
  Rule app_left{"app-left", 1, op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k2, {})}), {},
                op_(d.sig, 1, 0, {meta_(k3, {}), meta_(k2, {})})};
  app_left.premises.push_back({meta_(k1, {}), 1, meta_(k3, {})});
  d.rules.push_back(app_left);
  Rule beta_tau{"beta-tau", 1, op_(d.sig, 1, 0, {meta_(k1, {}), meta_(k2, {})}), {},
                meta_(b3, {meta_(k2, {})})};
  beta_tau.premises.push_back({meta_(k1, {}), 0, meta_(b3, {var_(0, 1)})});
  d.rules.push_back(beta_tau);
  d.rules.push_back({"amb-step", 1, op_(d.sig, 2, 0, {meta_(k1, {})}), {}, meta_(k1, {})});
  d.rules.push_back({"amb-omega", 1, op_(d.sig, 2, 0, {meta_(k1, {})}), {}, omega(d.sig)});

  MetaVar x = mv("x", cl, 0), y = mv("y", cl, 0), z = mv("z", cl, 0), w = mv("w", one, 0);
  d.schematic.push_back({"refl", 1, meta_(x, {}), {}, meta_(x, {})});
  Rule trans{"trans", 1, meta_(x, {}), {}, meta_(z, {})};
  trans.premises.push_back({meta_(x, {}), 1, meta_(y, {})});
  trans.premises.push_back({meta_(y, {}), 1, meta_(z, {})});
  d.schematic.push_back(trans);
  Rule tte{"tau-then-eval", 0, meta_(x, {}), {}, meta_(w, {var_(0, 1)})};
  tte.premises.push_back({meta_(x, {}), 1, meta_(y, {})});
  tte.premises.push_back({meta_(y, {}), 0, meta_(w, {var_(0, 1)})});
  d.schematic.push_back(tte);
  return d;
}

DynamicSignature make_cbn_howe() {
  DynamicSignature d;
  d.sig = BindingSignature{SortTable::make({"v", "p"}, {Coercion{0, 1, true}}), 1, {}};
  d.sig.ops.push_back({"lam", 0, {ArgSpec{1, Context{{0, 1}}}}, OpKind::Value, 0});
  d.sig.ops.push_back(
      {"app", 1, {ArgSpec{1, Context{{0, 0}}}, ArgSpec{1, Context{{0, 0}}}}, OpKind::Program, 0});
  d.sig.check();
  d.labels.push_back({"eval", 1, Context{{0, 0}}, 0, Context{{0, 0}}});
  MetaVar k1 = mv("k1", Context{{0, 0}}, 1), k2 = mv("k2", Context{{0, 0}}, 1);
  MetaVar k3 = mv("k3", Context{{0, 1}}, 1), k4 = mv("k4", Context{{0, 0}}, 0);
  Rule beta{"beta", 0, op_(d.sig, 1, 1, {meta_(k1, {}), meta_(k2, {})}), {}, meta_(k4, {})};
  beta.premises.push_back({meta_(k1, {}), 0, op_(d.sig, 0, 0, {meta_(k3, {var_(1, 1)})})});
  beta.premises.push_back({meta_(k3, {meta_(k2, {})}), 0, meta_(k4, {})});
  d.howe.push_back(beta);
  return d;
}

}  // namespace

DynamicSignature load_instance(std::string_view name) {
  DynamicSignature d;
  if (name == "cbn")
    d = make_cbn();
  else if (name == "cbv")
    d = make_cbv();
  else if (name == "nondet")
    d = make_nondet();
  else if (name == "cbn-howe")
    d = make_cbn_howe();
  else
    throw StructuralError("unknown instance: " + std::string(name));
  ValidationReport rep = validate_signature(d);
  if (!rep.ok)
    throw StructuralError("built-in instance failed validation: " +
                          rep.diagnostics.front().message);
  return d;
}

std::vector<InstanceInfo> catalog() {
  return {
      {"cbn", "call-by-name lambda calculus; 2 operators, 2 rules", 3, false, true},
      {"cbv", "call-by-value lambda calculus with a value coercion; 2 operators, 2 rules", 3,
       true, false},
      {"nondet", "erratic-choice lambda calculus; 3 operators, 9 rules (3 schematic)", 3, false,
       true},
      {"cbn-howe", "call-by-name lambda in value-passive format; 2 operators, 1 rule", 3, true,
       false},
  };
}

}  // namespace opsem
