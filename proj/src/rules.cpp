#include "opsem/rules.hpp"

#include <algorithm>
#include <set>

namespace opsem {

namespace {

int supply_index(const BindingSignature& sig, const Context& c, SortId s, int declared) {
  if (const Coercion* co = sig.sorts.into(s); co && co->counterpart)
    return c.counts[co->sub] + declared;
  return declared;
}

Diagnostic diag(std::string code, std::string message, std::string rule, int premise = 0) {
  return Diagnostic{std::move(code), std::move(message), std::move(rule), premise};
}

void collect_mvs(const Term& t, std::vector<MetaVar>& out) {
  if (t->tag == Tag::Meta) out.push_back(*t->mv);
  for (const Term& a : t->args) collect_mvs(a, out);
}

using Introduced = std::map<std::string, MetaVar>;

// Checks a conclusion-source head pattern: an operation applied to distinct
// generic metavariables, each with parameter context ambient+binds. Fills
// `introduced` on success, returns false on any shape defect.
bool check_head_pattern(const BindingSignature& sig, const Term& head, const Context& ambient,
                        Introduced& introduced) {
  if (!head || head->tag != Tag::Op) return false;
  std::vector<ArgSpec> specs = sig.arg_specs_at(head->index, head->sort);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const Term& a = head->args[k];
    Context amb = sig.extend(ambient, specs[k].binds);
    if (a->tag != Tag::Meta || !(a->mv->params == amb) || a->mv->sort != specs[k].sort ||
        !is_generic_meta(sig, a, amb) || introduced.count(a->mv->name))
      return false;
    introduced.emplace(a->mv->name, *a->mv);
  }
  return true;
}

void check_mvs_introduced(const Term& t, const Introduced& introduced, const std::string& where,
                          const std::string& rule, int premise, std::vector<Diagnostic>& ds,
                          bool& ok) {
  std::vector<MetaVar> mvs;
  collect_mvs(t, mvs);
  std::set<std::string> reported;
  for (const MetaVar& m : mvs) {
    auto it = introduced.find(m.name);
    if (it == introduced.end()) {
      if (reported.insert(m.name).second)
        ds.push_back(diag("unintroduced-metavariable",
                          where + " mentions metavariable " + m.name +
                              " before any premise introduces it",
                          rule, premise));
      ok = false;
    } else if (!(it->second == m)) {
      if (reported.insert(m.name + "#decl").second)
        ds.push_back(diag("metavariable-mismatch",
                          "metavariable " + m.name +
                              " is used at a different sort or parameter context than introduced",
                          rule, premise));
      ok = false;
    }
  }
}

// Premise and conclusion-target checks shared by rigid and schematic rules.
void check_premises_and_target(const DynamicSignature& dsig, const Rule& rule,
                               Introduced& introduced, std::vector<Diagnostic>& ds) {
  const BindingSignature& sig = dsig.sig;
  for (std::size_t pi = 0; pi < rule.premises.size(); ++pi) {
    const RulePremise& pr = rule.premises[pi];
    int pnum = static_cast<int>(pi) + 1;
    if (pr.label < 0 || pr.label >= static_cast<int>(dsig.labels.size())) {
      ds.push_back(diag("undeclared-label", "premise references an undeclared label", rule.name, pnum));
      continue;
    }
    const Label& pl = dsig.labels[pr.label];

    bool src_ok = true;
    check_mvs_introduced(pr.source, introduced, "premise source", rule.name, pnum, ds, src_ok);
    if (src_ok) {
      try {
        well_formed(sig, pr.source, pl.src_ctx, pl.src_sort);
      } catch (const StructuralError& e) {
        ds.push_back(diag("ill-formed-premise-source",
                          std::string("premise source is not well formed in the label's source "
                                      "context: ") +
                              e.what(),
                          rule.name, pnum));
      }
    }

    const Term& t = pr.target;
    bool bare = t && t->tag == Tag::Meta && t->mv->params == pl.tgt_ctx &&
                t->mv->sort == pl.tgt_sort && is_generic_meta(sig, t, pl.tgt_ctx);
    if (bare && introduced.count(t->mv->name)) {
      ds.push_back(diag("reused-metavariable",
                        "premise target metavariable " + t->mv->name + " is already introduced",
                        rule.name, pnum));
    } else if (!bare) {
      ds.push_back(diag(kNonMetavariableTarget,
                        "premise target pattern is not a bare fresh metavariable; rigidify this rule",
                        rule.name, pnum));
    } else {
      introduced.emplace(t->mv->name, *t->mv);
    }
  }

  const Label& lab = dsig.labels[rule.label];
  bool tgt_ok = true;
  check_mvs_introduced(rule.target, introduced, "conclusion target", rule.name, 0, ds, tgt_ok);
  if (tgt_ok) {
    try {
      well_formed(sig, rule.target, lab.tgt_ctx, lab.tgt_sort);
    } catch (const StructuralError& e) {
      ds.push_back(diag("ill-formed-conclusion-target",
                        std::string("conclusion target is not well formed in the label's target "
                                    "context: ") +
                            e.what(),
                        rule.name, 0));
    }
  }
}

std::string fresh_name(const std::string& base, std::set<std::string>& taken) {
  std::string n = base;
  while (!taken.insert(n).second) n += "_";
  return n;
}

// Operations usable as constructor heads at sort s, in declaration order:
// result sort s directly, or a value operation whose result coerces to s
// through a counterpart coercion.
std::vector<int> constructor_ops(const BindingSignature& sig, SortId s) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(sig.ops.size()); ++i) {
    const Operator& o = sig.ops[i];
    if (o.result == s) {
      out.push_back(i);
    } else if (o.kind == OpKind::Value) {
      if (const Coercion* co = sig.sorts.from(o.result); co && co->counterpart && co->super == s)
        out.push_back(i);
    }
  }
  return out;
}

std::string op_key(const BindingSignature& sig, int op, SortId ann) {
  if (op < 0) return "coerce";
  (void)ann;
  const Operator& o = sig.op(op);
  if (o.kind == OpKind::Value) return o.name + "@" + sig.sorts.name(ann);
  return o.name;
}

}  // namespace

std::optional<int> DynamicSignature::label_id(std::string_view name) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i].name == name) return static_cast<int>(i);
  return std::nullopt;
}

bool is_generic_meta(const BindingSignature& sig, const Term& t, const Context& ambient) {
  if (!t || t->tag != Tag::Meta) return false;
  const Context& p = t->mv->params;
  for (std::size_t s = 0; s < p.counts.size(); ++s)
    if (p.counts[s] > ambient.counts[s]) return false;
  std::vector<Term> want = generic_args(sig, p, ambient);
  if (want.size() != t->args.size()) return false;
  for (std::size_t k = 0; k < want.size(); ++k)
    if (!equal(want[k], t->args[k])) return false;
  return true;
}

std::vector<Term> generic_args(const BindingSignature& sig, const Context& params,
                               const Context& ambient) {
  std::vector<Term> out;
  for (SortId s = 0; s < static_cast<SortId>(params.counts.size()); ++s)
    for (int i = 1; i <= params.counts[s]; ++i) {
      int declared = ambient.counts[s] - params.counts[s] + i;
      out.push_back(var_(s, supply_index(sig, ambient, s, declared)));
    }
  return out;
}

HeadInfo head_of(const BindingSignature& sig, const Rule& rule) {
  (void)sig;
  HeadInfo h;
  Term s = rule.source;
  if (s && s->tag == Tag::Coerce) {
    h.coerced = true;
    s = s->args[0];
  }
  if (h.coerced && s && s->tag == Tag::Meta) {
    h.op = -1;  // matches any coercion-headed term of the sub sort
    h.ann = s->sort;
    return h;
  }
  if (!s || s->tag != Tag::Op) throw StructuralError("rule source has no operation head");
  h.op = s->index;
  h.ann = s->sort;
  return h;
}

MetaVar premise_fresh(const RulePremise& p) {
  if (!p.target || p.target->tag != Tag::Meta)
    throw StructuralError("premise target is not a bare metavariable");
  return *p.target->mv;
}

std::vector<Diagnostic> validate_rigid(const DynamicSignature& dsig, const Rule& rule) {
  std::vector<Diagnostic> ds;
  const BindingSignature& sig = dsig.sig;
  if (rule.label < 0 || rule.label >= static_cast<int>(dsig.labels.size())) {
    ds.push_back(diag("undeclared-label", "rule references an undeclared label", rule.name));
    return ds;
  }
  const Label& lab = dsig.labels[rule.label];

  Term head = rule.source;
  bool coerced = false;
  if (head && head->tag == Tag::Coerce) {
    coerced = true;
    head = head->args[0];
  }
  Introduced introduced;
  bool head_ok = false;
  if (head && head->tag == Tag::Op) {
    if (coerced) {
      const Coercion* co = sig.sorts.from(head->sort);
      head_ok = co && !co->counterpart && co->super == lab.src_sort;
    } else {
      head_ok = head->sort == lab.src_sort;
    }
    if (head_ok) head_ok = check_head_pattern(sig, head, lab.src_ctx, introduced);
  } else if (coerced && head && head->tag == Tag::Meta) {
    // coercion constructor form: coerce applied to a bare wildcard
    const Coercion* co = sig.sorts.from(head->sort);
    head_ok = co && !co->counterpart && co->super == lab.src_sort &&
              head->mv->sort == co->sub && head->mv->params == lab.src_ctx &&
              is_generic_meta(sig, head, lab.src_ctx);
    if (head_ok) introduced.emplace(head->mv->name, *head->mv);
  }
  if (!head_ok) {
    ds.push_back(diag("non-generic-head",
                      "conclusion source is not an operation applied to distinct generic "
                      "metavariables at the label's source sort",
                      rule.name));
    return ds;
  }

  check_premises_and_target(dsig, rule, introduced, ds);
  return ds;
}

std::vector<Diagnostic> validate_schematic(const DynamicSignature& dsig, const Rule& rule) {
  std::vector<Diagnostic> ds;
  const BindingSignature& sig = dsig.sig;
  if (rule.label < 0 || rule.label >= static_cast<int>(dsig.labels.size())) {
    ds.push_back(diag("undeclared-label", "rule references an undeclared label", rule.name));
    return ds;
  }
  const Label& lab = dsig.labels[rule.label];

  const Term& h = rule.source;
  bool head_ok = h && h->tag == Tag::Meta && h->mv->params == lab.src_ctx &&
                 h->mv->sort == lab.src_sort && is_generic_meta(sig, h, lab.src_ctx);
  if (!head_ok) {
    ds.push_back(diag("non-wildcard-head",
                      "schematic conclusion source is not a bare metavariable over the label's "
                      "source context",
                      rule.name));
    return ds;
  }
  if (!lab.src_ctx.closed()) {
    ds.push_back(diag("open-schematic-context",
                      "schematic rules require a closed conclusion source context", rule.name));
    return ds;
  }

  Introduced introduced;
  introduced.emplace(h->mv->name, *h->mv);
  check_premises_and_target(dsig, rule, introduced, ds);
  return ds;
}

std::vector<Diagnostic> validate_howe(const DynamicSignature& dsig, const Rule& rule) {
  std::vector<Diagnostic> ds;
  const BindingSignature& sig = dsig.sig;
  if (rule.label < 0 || rule.label >= static_cast<int>(dsig.labels.size())) {
    ds.push_back(diag("undeclared-label", "rule references an undeclared label", rule.name));
    return ds;
  }
  const Label& lab = dsig.labels[rule.label];
  const Coercion* co = lab.tgt_sort >= 0 ? sig.sorts.from(lab.tgt_sort) : nullptr;
  bool lab_ok = co && co->counterpart && co->super == lab.src_sort && lab.src_ctx.closed() &&
                lab.tgt_ctx.closed();
  if (!lab_ok) {
    ds.push_back(diag("howe-label-shape",
                      "classical rules need an evaluation label from closed programs to closed "
                      "values",
                      rule.name));
    return ds;
  }

  Introduced introduced;
  bool head_ok = rule.source && rule.source->tag == Tag::Op && rule.source->sort == lab.src_sort &&
                 sig.op(rule.source->index).kind == OpKind::Program &&
                 check_head_pattern(sig, rule.source, lab.src_ctx, introduced);
  if (!head_ok) {
    ds.push_back(diag("non-generic-head",
                      "classical rule head is not a program operation applied to distinct "
                      "generic metavariables",
                      rule.name));
    return ds;
  }

  for (std::size_t pi = 0; pi < rule.premises.size(); ++pi) {
    const RulePremise& pr = rule.premises[pi];
    int pnum = static_cast<int>(pi) + 1;
    if (pr.label != rule.label) {
      ds.push_back(diag("howe-premise-label",
                        "classical premises all use the evaluation label", rule.name, pnum));
      continue;
    }

    bool src_ok = true;
    check_mvs_introduced(pr.source, introduced, "premise source", rule.name, pnum, ds, src_ok);
    if (src_ok) {
      try {
        well_formed(sig, pr.source, lab.src_ctx, lab.src_sort);
      } catch (const StructuralError& e) {
        ds.push_back(diag("ill-formed-premise-source",
                          std::string("premise source is not well formed in the label's source "
                                      "context: ") +
                              e.what(),
                          rule.name, pnum));
      }
    }

    const Term& t = pr.target;
    bool ok = false;
    if (t && t->tag == Tag::Meta) {
      ok = !introduced.count(t->mv->name) && t->mv->params == lab.tgt_ctx &&
           t->mv->sort == lab.tgt_sort && is_generic_meta(sig, t, lab.tgt_ctx);
      if (ok) introduced.emplace(t->mv->name, *t->mv);
    } else if (t && t->tag == Tag::Op && t->sort == lab.tgt_sort &&
               sig.op(t->index).kind == OpKind::Value) {
      Introduced fresh = introduced;
      ok = check_head_pattern(sig, t, lab.tgt_ctx, fresh);
      if (ok) introduced = std::move(fresh);
    }
    if (!ok)
      ds.push_back(diag("howe-premise-target",
                        "premise target must be a fresh metavariable or a value operation "
                        "applied to fresh metavariables",
                        rule.name, pnum));
  }

  const Term& t = rule.target;
  bool tgt_ok = t && t->tag == Tag::Meta && introduced.count(t->mv->name) &&
                t->mv->params == lab.tgt_ctx && t->mv->sort == lab.tgt_sort &&
                is_generic_meta(sig, t, lab.tgt_ctx);
  if (tgt_ok && !(introduced.at(t->mv->name) == *t->mv)) tgt_ok = false;
  if (!tgt_ok)
    ds.push_back(diag("howe-conclusion-target",
                      "conclusion target must be an introduced value metavariable", rule.name));
  return ds;
}

std::vector<Rule> expand_schematic(const DynamicSignature& dsig, const Rule& rule) {
  const BindingSignature& sig = dsig.sig;
  if (auto ds = validate_schematic(dsig, rule); !ds.empty())
    throw StructuralError("schematic rule " + rule.name + " is not expandable: " +
                          ds.front().message);
  const Label& lab = dsig.labels[rule.label];
  const std::string head_name = rule.source->mv->name;

  std::set<std::string> taken;
  {
    std::vector<MetaVar> mvs;
    collect_mvs(rule.source, mvs);
    for (const RulePremise& p : rule.premises) {
      collect_mvs(p.source, mvs);
      collect_mvs(p.target, mvs);
    }
    collect_mvs(rule.target, mvs);
    for (const MetaVar& m : mvs) taken.insert(m.name);
  }
  taken.erase(head_name);

  struct Form {
    std::string suffix;
    Term pattern;
  };
  std::vector<Form> forms;
  for (int op : constructor_ops(sig, lab.src_sort)) {
    std::set<std::string> names = taken;
    std::vector<ArgSpec> specs = sig.arg_specs_at(op, lab.src_sort);
    std::vector<Term> args;
    for (std::size_t k = 0; k < specs.size(); ++k) {
      Context amb = sig.extend(lab.src_ctx, specs[k].binds);
      MetaVar mv{fresh_name(head_name + std::to_string(k + 1), names), amb, specs[k].sort};
      args.push_back(meta_(mv, generic_args(sig, amb, amb)));
    }
    forms.push_back({sig.op(op).name, op_(sig, op, lab.src_sort, std::move(args))});
  }
  if (const Coercion* co = sig.sorts.into(lab.src_sort); co && !co->counterpart) {
    std::set<std::string> names = taken;
    MetaVar mv{fresh_name(head_name + "1", names), lab.src_ctx, co->sub};
    forms.push_back({"coerce", coerce_(sig, meta_(mv, generic_args(sig, lab.src_ctx, lab.src_ctx)))});
  }

  std::vector<Rule> out;
  for (const Form& f : forms) {
    // occurrences of the head metavariable are bare (its parameter context is
    // closed); insertion under binders shifts the pattern by the crossed block
    auto subst = [&](const Term& t, const Context& inner, auto&& self) -> Term {
      if (t->tag == Tag::Meta && t->mv->name == head_name)
        return inner.closed() ? f.pattern
                              : weaken(sig, f.pattern, sig.empty_context(), inner,
                                       sig.empty_context());
      if (t->args.empty()) return t;
      std::vector<Term> args;
      args.reserve(t->args.size());
      if (t->tag == Tag::Op) {
        std::vector<ArgSpec> specs = sig.arg_specs_at(t->index, t->sort);
        for (std::size_t k = 0; k < t->args.size(); ++k)
          args.push_back(self(t->args[k], sig.extend(inner, specs[k].binds), self));
        return op_(sig, t->index, t->sort, std::move(args));
      }
      for (const Term& a : t->args) args.push_back(self(a, inner, self));
      if (t->tag == Tag::Meta) return meta_(*t->mv, std::move(args));
      return coerce_(sig, args[0]);
    };

    Rule r;
    r.name = rule.name + "-" + f.suffix;
    r.label = rule.label;
    r.source = f.pattern;
    for (const RulePremise& p : rule.premises)
      r.premises.push_back({subst(p.source, sig.empty_context(), subst), p.label,
                            subst(p.target, sig.empty_context(), subst)});
    r.target = subst(rule.target, sig.empty_context(), subst);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Label> howe_label_set(const BindingSignature& sig) {
  const Coercion* co = nullptr;
  for (const Coercion& c : sig.sorts.coercions)
    if (c.counterpart) co = &c;
  if (!co || !sig.binding_sort)
    throw StructuralError("rigid label set needs a counterpart coercion and a binding sort");
  Context empty = sig.empty_context();
  std::vector<Label> out;
  out.push_back({"eval", co->super, empty, co->sub, empty});
  for (const Operator& o : sig.ops) {
    if (o.kind != OpKind::Value) continue;
    for (int i = 1; i <= o.actives; ++i)
      out.push_back({o.name + "-active-" + std::to_string(i), co->sub, empty, co->sub, empty});
    for (int j = 1; j <= o.passives(); ++j) {
      const ArgSpec& spec = o.args[o.actives + j - 1];
      out.push_back({o.name + "-passive-" + std::to_string(j), co->sub, empty, spec.sort,
                     spec.binds});
    }
  }
  return out;
}

std::vector<Rule> canonical_rules(const BindingSignature& sig, const std::vector<Label>& labels) {
  auto label_id = [&](const std::string& name) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i].name == name) return static_cast<int>(i);
    throw StructuralError("missing extraction label " + name);
  };
  const Coercion* co = nullptr;
  for (const Coercion& c : sig.sorts.coercions)
    if (c.counterpart) co = &c;
  if (!co) throw StructuralError("canonical rules need a counterpart coercion");
  const SortId sub = co->sub, super = co->super;
  Context empty = sig.empty_context();

  std::vector<Rule> out;
  for (int op = 0; op < static_cast<int>(sig.ops.size()); ++op) {
    const Operator& o = sig.op(op);
    if (o.kind != OpKind::Value) continue;
    int np = o.actives, nm = o.passives();

    // evaluation rule: actives evaluate left to right, passives pass through
    {
      Rule r;
      r.name = o.name + "-eval";
      r.label = 0;
      std::vector<ArgSpec> specs = sig.arg_specs_at(op, super);
      std::vector<Term> head_args;
      std::vector<MetaVar> ks, bs;
      for (int i = 1; i <= np; ++i) {
        MetaVar k{"k" + std::to_string(i), empty, super};
        ks.push_back(k);
        head_args.push_back(meta_(k, {}));
      }
      for (int j = 1; j <= nm; ++j) {
        const ArgSpec& spec = specs[np + j - 1];
        MetaVar b{"b" + std::to_string(j), spec.binds, spec.sort};
        bs.push_back(b);
        head_args.push_back(meta_(b, generic_args(sig, spec.binds, spec.binds)));
      }
      r.source = op_(sig, op, super, std::move(head_args));
      std::vector<MetaVar> vs;
      for (int i = 1; i <= np; ++i) {
        MetaVar v{"v" + std::to_string(i), empty, sub};
        vs.push_back(v);
        r.premises.push_back({meta_(ks[i - 1], {}), 0, meta_(v, {})});
      }
      std::vector<Term> tgt_args;
      for (int i = 1; i <= np; ++i) tgt_args.push_back(meta_(vs[i - 1], {}));
      for (int j = 1; j <= nm; ++j)
        tgt_args.push_back(meta_(bs[j - 1], generic_args(sig, bs[j - 1].params, bs[j - 1].params)));
      r.target = op_(sig, op, sub, std::move(tgt_args));
      out.push_back(std::move(r));
    }

    auto value_pattern = [&](std::vector<MetaVar>& as, std::vector<MetaVar>& bs) {
      std::vector<ArgSpec> specs = sig.arg_specs_at(op, sub);
      std::vector<Term> args;
      for (int i = 1; i <= np; ++i) {
        MetaVar a{"a" + std::to_string(i), empty, sub};
        as.push_back(a);
        args.push_back(meta_(a, {}));
      }
      for (int j = 1; j <= nm; ++j) {
        const ArgSpec& spec = specs[np + j - 1];
        MetaVar b{"b" + std::to_string(j), spec.binds, spec.sort};
        bs.push_back(b);
        args.push_back(meta_(b, generic_args(sig, spec.binds, spec.binds)));
      }
      return op_(sig, op, sub, std::move(args));
    };

    for (int i = 1; i <= np; ++i) {
      Rule r;
      r.name = o.name + "-active-" + std::to_string(i);
      r.label = label_id(r.name);
      std::vector<MetaVar> as, bs;
      r.source = value_pattern(as, bs);
      r.target = meta_(as[i - 1], {});
      out.push_back(std::move(r));
    }
    for (int j = 1; j <= nm; ++j) {
      Rule r;
      r.name = o.name + "-passive-" + std::to_string(j);
      r.label = label_id(r.name);
      std::vector<MetaVar> as, bs;
      r.source = value_pattern(as, bs);
      const Label& lab = labels[r.label];
      r.target = meta_(bs[j - 1], generic_args(sig, bs[j - 1].params, lab.tgt_ctx));
      out.push_back(std::move(r));
    }
  }
  return out;
}

RigidifyResult rigidify(const DynamicSignature& dsig) {
  const BindingSignature& sig = dsig.sig;
  if (dsig.labels.size() != 1)
    throw StructuralError("rigidify expects exactly the evaluation label");
  for (const Rule& r : dsig.howe)
    if (auto ds = validate_howe(dsig, r); !ds.empty())
      throw StructuralError("classical rule " + r.name + ": " + ds.front().message);

  RigidifyResult res;
  res.dsig.sig = sig;
  res.dsig.labels = dsig.labels;
  std::vector<Label> gen = howe_label_set(sig);
  for (std::size_t i = 1; i < gen.size(); ++i) res.dsig.labels.push_back(gen[i]);
  auto label_id = [&](const std::string& name) { return *res.dsig.label_id(name); };

  res.dsig.rules = dsig.rules;
  res.dsig.schematic = dsig.schematic;

  for (const Rule& rule : dsig.howe) {
    std::set<std::string> taken;
    {
      std::vector<MetaVar> mvs;
      collect_mvs(rule.source, mvs);
      for (const RulePremise& p : rule.premises) {
        collect_mvs(p.source, mvs);
        collect_mvs(p.target, mvs);
      }
      collect_mvs(rule.target, mvs);
      for (const MetaVar& m : mvs) taken.insert(m.name);
    }

    Rule r;
    r.name = rule.name;
    r.label = rule.label;
    r.source = rule.source;
    r.target = rule.target;
    int next_fresh = 1;
    for (const RulePremise& p : rule.premises) {
      if (p.target->tag == Tag::Meta) {
        r.premises.push_back(p);
        continue;
      }
      const int op = p.target->index;
      const Operator& o = sig.op(op);
      MetaVar c{fresh_name("c" + std::to_string(next_fresh++), taken), sig.empty_context(),
                p.target->sort};
      r.premises.push_back({p.source, rule.label, meta_(c, {})});
      for (int i = 1; i <= o.actives; ++i)
        r.premises.push_back({meta_(c, {}), label_id(o.name + "-active-" + std::to_string(i)),
                              p.target->args[i - 1]});
      for (int j = 1; j <= o.passives(); ++j)
        r.premises.push_back({meta_(c, {}), label_id(o.name + "-passive-" + std::to_string(j)),
                              p.target->args[o.actives + j - 1]});
    }
    res.dsig.rules.push_back(r);
    res.mapping.emplace_back(rule.name, r.name);
  }

  for (Rule& r : canonical_rules(sig, res.dsig.labels)) {
    std::string origin;
    for (const Operator& o : sig.ops)
      if (r.name.rfind(o.name + "-", 0) == 0) origin = "op:" + o.name;
    res.mapping.emplace_back(origin, r.name);
    res.dsig.rules.push_back(std::move(r));
  }

  ValidationReport rep = validate_signature(res.dsig);
  if (!rep.ok)
    throw StructuralError("rigidified signature failed validation: " +
                          rep.diagnostics.front().message);
  return res;
}

ValidationReport validate_signature(DynamicSignature& dsig) {
  ValidationReport rep;
  dsig.validated = false;
  dsig.expanded.clear();
  dsig.expanded_heads.clear();
  dsig.dispatch.clear();

  const BindingSignature& sig = dsig.sig;
  int nsorts = sig.sorts.size();
  for (const Label& l : dsig.labels) {
    bool ok = l.src_sort >= 0 && l.src_sort < nsorts && l.tgt_sort >= 0 && l.tgt_sort < nsorts &&
              static_cast<int>(l.src_ctx.counts.size()) == nsorts &&
              static_cast<int>(l.tgt_ctx.counts.size()) == nsorts;
    if (!ok)
      rep.diagnostics.push_back(
          diag("bad-label", "label " + l.name + " has out-of-range sorts or contexts", ""));
  }

  std::set<std::string> names;
  auto check_name = [&](const Rule& r) {
    if (!names.insert(r.name).second)
      rep.diagnostics.push_back(diag("duplicate-rule-name",
                                     "rule name " + r.name + " is declared more than once", r.name));
  };
  for (const Rule& r : dsig.rules) check_name(r);
  for (const Rule& r : dsig.schematic) check_name(r);
  for (const Rule& r : dsig.howe) check_name(r);

  if (rep.diagnostics.empty()) {
    for (const Rule& r : dsig.rules)
      for (Diagnostic& d : validate_rigid(dsig, r)) rep.diagnostics.push_back(std::move(d));
    for (const Rule& r : dsig.schematic)
      for (Diagnostic& d : validate_schematic(dsig, r)) rep.diagnostics.push_back(std::move(d));
    for (const Rule& r : dsig.howe)
      for (Diagnostic& d : validate_howe(dsig, r)) rep.diagnostics.push_back(std::move(d));
  }
  if (!rep.diagnostics.empty()) return rep;

  dsig.expanded = dsig.rules;
  for (const Rule& r : dsig.schematic)
    for (Rule& e : expand_schematic(dsig, r)) {
      if (!names.insert(e.name).second)
        rep.diagnostics.push_back(diag("duplicate-rule-name",
                                       "expanded rule name " + e.name + " collides", e.name));
      dsig.expanded.push_back(std::move(e));
    }
  if (!rep.diagnostics.empty()) {
    dsig.expanded.clear();
    return rep;
  }

  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> tally;
  for (int i = 0; i < static_cast<int>(dsig.expanded.size()); ++i) {
    const Rule& r = dsig.expanded[i];
    HeadInfo h = head_of(sig, r);
    dsig.expanded_heads.push_back(h);
    dsig.dispatch[{h.op, h.ann, r.label}].push_back(i);
    std::pair<std::string, std::string> key{op_key(sig, h.op, h.ann),
                                            dsig.labels[r.label].name};
    auto [it, fresh] = tally.try_emplace(key);
    if (fresh) keys.push_back(key);
    it->second.push_back(r.name);
  }
  for (const auto& key : keys)
    rep.table.emplace_back(key.first, key.second, tally.at(key));

  rep.ok = true;
  dsig.validated = true;
  return rep;
}

}  // namespace opsem
