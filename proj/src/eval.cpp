#include "opsem/eval.hpp"

#include <algorithm>
#include <queue>
#include <unordered_set>

namespace opsem {

namespace {

bool bind_head_pattern(const BindingSignature& sig, const Rule& r, const HeadInfo& h,
                       const Term& t, MetaEnv& env) {
  (void)sig;
  Term subject = t;
  if (h.coerced) {
    if (!subject || subject->tag != Tag::Coerce) return false;
    subject = subject->args[0];
  } else if (subject && subject->tag == Tag::Coerce) {
    return false;
  }
  if (!subject) return false;
  if (h.op < 0) {
    const Term& pat = r.source->args[0];
    if (subject->sort != pat->sort) return false;
    env.set(pat->mv->name, subject);
    return true;
  }
  if (subject->tag != Tag::Op || subject->index != h.op || subject->sort != h.ann) return false;
  const Term& pat = h.coerced ? r.source->args[0] : r.source;
  for (std::size_t k = 0; k < pat->args.size(); ++k)
    env.set(pat->args[k]->mv->name, subject->args[k]);
  return true;
}

}  // namespace

EvalSession::EvalSession(const DynamicSignature& dsig) : dsig_(dsig) {
  if (!dsig.validated) throw StructuralError("evaluation needs a validated signature");
}

std::vector<int> EvalSession::candidates(const Term& t, int label) const {
  std::vector<int> out;
  auto take = [&](int op, SortId ann) {
    auto it = dsig_.dispatch.find({op, ann, label});
    if (it != dsig_.dispatch.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  };
  if (t->tag == Tag::Op) {
    take(t->index, t->sort);
  } else if (t->tag == Tag::Coerce) {
    const Term& inner = t->args[0];
    if (inner->tag == Tag::Op) take(inner->index, inner->sort);
    take(-1, inner->sort);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool EvalSession::bind_head(const Term& t, int rule_idx, MetaEnv& env) const {
  return bind_head_pattern(dsig_.sig, dsig_.expanded[rule_idx], dsig_.expanded_heads[rule_idx], t,
                           env);
}

TransitionSet EvalSession::transitions(const Term& t, int label, int fuel) {
  if (fuel <= 0) return TransitionSet{{}, true};
  Key key{t, label, fuel};
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  TransitionSet result;
  std::unordered_set<Term, TermHash, TermEq> seen;
  for (int idx : candidates(t, label)) {
    const Rule& r = dsig_.expanded[idx];
    MetaEnv env0;
    if (!bind_head(t, idx, env0)) continue;
    std::vector<MetaEnv> envs{std::move(env0)};
    for (const RulePremise& p : r.premises) {
      std::vector<MetaEnv> next;
      const Label& pl = dsig_.labels[p.label];
      MetaVar fresh = premise_fresh(p);
      for (MetaEnv& env : envs) {
        Term src = instantiate(dsig_.sig, p.source, env, pl.src_ctx);
        TransitionSet sub = transitions(src, p.label, fuel - 1);
        result.fuel_exhausted = result.fuel_exhausted || sub.fuel_exhausted;
        for (const Term& u : sub.targets) {
          MetaEnv e2 = env;
          e2.set(fresh.name, u);
          next.push_back(std::move(e2));
        }
      }
      envs = std::move(next);
      if (envs.empty()) break;
    }
    const Label& lab = dsig_.labels[r.label];
    for (MetaEnv& env : envs) {
      Term u = instantiate(dsig_.sig, r.target, env, lab.tgt_ctx);
      if (seen.insert(u).second) result.targets.push_back(u);
    }
  }
  memo_.emplace(std::move(key), result);
  return result;
}

std::vector<Derivation> EvalSession::derivation_trace(const Term& t, int label, int fuel) {
  if (fuel <= 0) return {};
  Key key{t, label, fuel};
  if (auto it = trace_memo_.find(key); it != trace_memo_.end()) return it->second;

  std::vector<Derivation> result;
  std::unordered_set<Term, TermHash, TermEq> seen;
  for (int idx : candidates(t, label)) {
    const Rule& r = dsig_.expanded[idx];
    MetaEnv env0;
    if (!bind_head(t, idx, env0)) continue;
    struct State {
      MetaEnv env;
      std::vector<Derivation> premises;
    };
    std::vector<State> states{{std::move(env0), {}}};
    for (const RulePremise& p : r.premises) {
      std::vector<State> next;
      const Label& pl = dsig_.labels[p.label];
      MetaVar fresh = premise_fresh(p);
      for (State& st : states) {
        Term src = instantiate(dsig_.sig, p.source, st.env, pl.src_ctx);
        for (Derivation& d : derivation_trace(src, p.label, fuel - 1)) {
          State s2 = st;
          s2.env.set(fresh.name, d.target);
          s2.premises.push_back(d);
          next.push_back(std::move(s2));
        }
      }
      states = std::move(next);
      if (states.empty()) break;
    }
    const Label& lab = dsig_.labels[r.label];
    for (State& st : states) {
      Term u = instantiate(dsig_.sig, r.target, st.env, lab.tgt_ctx);
      if (seen.insert(u).second)
        result.push_back(Derivation{idx, t, label, u, std::move(st.premises)});
    }
  }
  trace_memo_.emplace(std::move(key), result);
  return result;
}

TransitionSet transitions(const DynamicSignature& dsig, const Term& t, int label, int fuel) {
  if (label < 0 || label >= static_cast<int>(dsig.labels.size()))
    throw StructuralError("undeclared label");
  const Label& lab = dsig.labels[label];
  well_formed(dsig.sig, t, lab.src_ctx, lab.src_sort);
  EvalSession session(dsig);
  return session.transitions(t, label, fuel);
}

std::vector<Derivation> derivation_trace(const DynamicSignature& dsig, const Term& t, int label,
                                         int fuel) {
  if (label < 0 || label >= static_cast<int>(dsig.labels.size()))
    throw StructuralError("undeclared label");
  const Label& lab = dsig.labels[label];
  well_formed(dsig.sig, t, lab.src_ctx, lab.src_sort);
  EvalSession session(dsig);
  return session.derivation_trace(t, label, fuel);
}

bool check_derivation(const DynamicSignature& dsig, const Derivation& d) {
  if (!dsig.validated || d.rule < 0 || d.rule >= static_cast<int>(dsig.expanded.size()))
    return false;
  const Rule& r = dsig.expanded[d.rule];
  if (r.label != d.label) return false;
  MetaEnv env;
  if (!bind_head_pattern(dsig.sig, r, dsig.expanded_heads[d.rule], d.source, env)) return false;
  if (d.premises.size() != r.premises.size()) return false;
  for (std::size_t i = 0; i < r.premises.size(); ++i) {
    const RulePremise& p = r.premises[i];
    const Derivation& pd = d.premises[i];
    if (pd.label != p.label) return false;
    const Label& pl = dsig.labels[p.label];
    if (!equal(pd.source, instantiate(dsig.sig, p.source, env, pl.src_ctx))) return false;
    if (!check_derivation(dsig, pd)) return false;
    env.set(premise_fresh(p).name, pd.target);
  }
  const Label& lab = dsig.labels[r.label];
  return equal(d.target, instantiate(dsig.sig, r.target, env, lab.tgt_ctx));
}

Term omega(const BindingSignature& sig) {
  auto lam = sig.op_id("lam");
  auto app = sig.op_id("app");
  if (!lam || !app) throw StructuralError("the diverging representative needs lam and app");
  const Operator& lo = sig.op(*lam);
  const Operator& ao = sig.op(*app);
  if (lo.args.size() != 1 || ao.args.size() != 2)
    throw StructuralError("unexpected lam/app arities");
  SortId p = ao.result;
  SortId bound = -1;
  for (SortId s = 0; s < static_cast<SortId>(lo.args[0].binds.counts.size()); ++s)
    if (lo.args[0].binds.counts[s] == 1) bound = s;
  if (bound < 0) throw StructuralError("lam binds no variable");
  Term x = var_(bound, 1);
  Term xp = bound == p ? x : coerce_(sig, x);
  Term body = op_(sig, *app, p, {xp, xp});
  Term l = op_(sig, *lam, lo.result, {body});
  Term lp = lo.result == p ? l : coerce_(sig, l);
  return op_(sig, *app, p, {lp, lp});
}

OracleResult small_step_oracle(const DynamicSignature& dsig, const Term& t, int bound) {
  const BindingSignature& sig = dsig.sig;
  auto lam = sig.op_id("lam");
  auto app = sig.op_id("app");
  auto amb = sig.op_id("amb");
  if (sig.sorts.size() != 1 || !lam || !app || !amb || sig.op(*lam).args.size() != 1 ||
      sig.op(*app).args.size() != 2 || sig.op(*amb).args.size() != 1)
    throw StructuralError("the small-step oracle supports the lam/app/amb instance only");
  const Term w = omega(sig);

  // beta and choice steps cost 1; a left-application wrapper adds 1
  auto steps = [&](const Term& e, auto&& self) -> std::vector<std::pair<Term, int>> {
    std::vector<std::pair<Term, int>> out;
    if (e->tag != Tag::Op) return out;
    if (e->index == *amb) {
      out.push_back({e->args[0], 1});
      out.push_back({w, 1});
    } else if (e->index == *app) {
      const Term& f = e->args[0];
      if (f->tag == Tag::Op && f->index == *lam) {
        Substitution s{Context{{1}}, Context{{0}}, {{e->args[1]}}};
        out.push_back({substitute(sig, f->args[0], s), 1});
      }
      for (auto& [f2, cost] : self(f, self))
        out.push_back({op_(sig, *app, 0, {f2, e->args[1]}), cost + 1});
    }
    return out;
  };

  struct Entry {
    int cost;
    int seq;
    Term term;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.cost != b.cost ? a.cost > b.cost : a.seq > b.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Worse> queue;
  std::unordered_map<Term, int, TermHash, TermEq> dist;
  std::vector<Term> order;
  std::vector<Term> pruned;
  int seq = 0;

  dist.emplace(t, 0);
  order.push_back(t);
  queue.push({0, seq++, t});
  while (!queue.empty()) {
    Entry e = queue.top();
    queue.pop();
    if (e.cost > dist.at(e.term)) continue;
    for (auto& [u, w2] : steps(e.term, steps)) {
      int nc = e.cost + w2;
      if (nc > bound) {
        pruned.push_back(u);
        continue;
      }
      auto it = dist.find(u);
      if (it == dist.end()) {
        dist.emplace(u, nc);
        order.push_back(u);
        queue.push({nc, seq++, u});
      } else if (nc < it->second) {
        it->second = nc;
        queue.push({nc, seq++, u});
      }
    }
  }

  OracleResult res;
  res.reachable = std::move(order);
  res.complete = true;
  for (const Term& u : pruned)
    if (!dist.count(u)) res.complete = false;
  return res;
}

}  // namespace opsem
