#include "opsem/bisim.hpp"

#include <algorithm>
#include <unordered_set>

namespace opsem {

namespace {

// Raw index of declared variable i of sort s: counterpart supplies put the
// sub-sort block first.
int declared_index(const BindingSignature& sig, const Context& ctx, SortId s, int i) {
  const Coercion* into = sig.sorts.into(s);
  if (into && into->counterpart) return ctx.counts[into->sub] + i;
  return i;
}

void check_entry(const BindingSignature& sig, SortId s, const PoolEntry& e) {
  SortId want = s;
  if (e.program) {
    const Coercion* from = sig.sorts.from(s);
    if (!from)
      throw StructuralError("program pool entries need a coercion out of their sort");
    want = from->super;
  }
  if (e.term->sort != want) throw StructuralError("pool entry sort mismatch");
}

// Variables closed by program entries survive the substitution step; nctx
// counts them and entries lists their terms in survivor order.
struct NaiveView {
  Context nctx;
  std::vector<std::vector<PoolEntry>> entries;
};

Term strip_programs(const BindingSignature& sig, const Term& t, const NaiveView& nv,
                    const Context& ext) {
  switch (t->tag) {
    case Tag::Var: {
      SortId s = t->sort;
      int i = t->index;
      const Coercion* into = sig.sorts.into(s);
      if (into && into->counterpart) {
        int mine = nv.nctx.counts[into->sub];
        if (i <= mine)
          return weaken(sig, nv.entries[into->sub][i - 1].term, sig.empty_context(), ext,
                        sig.empty_context());
        int block = mine + ext.counts[into->sub];
        if (i <= block) return var_(s, i - mine);
        if (i <= block + nv.nctx.counts[s])
          throw StructuralError(
              "program pool entry reached a bare occurrence of its variable");
        return var_(s, i - mine - nv.nctx.counts[s]);
      }
      if (i <= nv.nctx.counts[s])
        throw StructuralError(
            "program pool entry reached a bare occurrence of its variable");
      return var_(s, i - nv.nctx.counts[s]);
    }
    case Tag::Meta: {
      std::vector<Term> args;
      args.reserve(t->args.size());
      for (const Term& a : t->args) args.push_back(strip_programs(sig, a, nv, ext));
      return meta_(*t->mv, std::move(args));
    }
    case Tag::Op: {
      std::vector<ArgSpec> specs = sig.arg_specs_at(t->index, t->sort);
      std::vector<Term> args;
      args.reserve(t->args.size());
      for (std::size_t i = 0; i < specs.size(); ++i)
        args.push_back(strip_programs(sig, t->args[i], nv,
                                      specs[i].binds.closed()
                                          ? ext
                                          : sig.extend(ext, specs[i].binds)));
      return op_(sig, t->index, t->sort, std::move(args));
    }
    case Tag::Coerce: {
      const Term& inner = t->args[0];
      if (inner->tag == Tag::Var && inner->index <= nv.nctx.counts[inner->sort])
        return weaken(sig, nv.entries[inner->sort][inner->index - 1].term,
                      sig.empty_context(), ext, sig.empty_context());
      return coerce_(sig, strip_programs(sig, inner, nv, ext));
    }
  }
  throw StructuralError("unreachable");
}

void prepend(Verdict& v, Witness w, const Verdict& sub) {
  v.trail.push_back(std::move(w));
  v.trail.insert(v.trail.end(), sub.trail.begin(), sub.trail.end());
}

// One matching direction: every challenge target must have a responder
// candidate that the pairwise test accepts. cand(challenge, candidate,
// from_left) returns the combined sub-verdict plus the pinning closing.
template <class Cand>
void match_side(const Term& t1, const Term& t2, const TransitionSet& chal,
                const TransitionSet& resp, int label, int depth, bool from_left,
                Cand&& cand, Verdict& fail, Verdict& inconclusive) {
  for (const Term& u : chal.targets) {
    if (fail.kind == VerdictKind::Fails) return;
    bool matched = false;
    bool all_fail = true;
    bool have_fail = false, have_inc = false;
    Verdict first_fail, first_inc;
    std::optional<Closing> fail_cl, inc_cl;
    for (const Term& v : resp.targets) {
      auto [sub, cl] = cand(u, v, from_left);
      if (sub.kind == VerdictKind::Holds) {
        matched = true;
        break;
      }
      if (sub.kind == VerdictKind::Fails) {
        if (!have_fail) {
          have_fail = true;
          first_fail = std::move(sub);
          fail_cl = std::move(cl);
        }
      } else {
        all_fail = false;
        if (!have_inc) {
          have_inc = true;
          first_inc = std::move(sub);
          inc_cl = std::move(cl);
        }
      }
    }
    if (matched) continue;
    if (all_fail && !resp.fuel_exhausted) {
      fail.kind = VerdictKind::Fails;
      fail.trail.clear();
      prepend(fail, Witness{t1, t2, from_left, label, u, fail_cl, depth}, first_fail);
      return;
    }
    if (inconclusive.kind == VerdictKind::Holds) {
      inconclusive.kind = VerdictKind::Inconclusive;
      prepend(inconclusive,
              Witness{t1, t2, from_left, label, u, have_inc ? inc_cl : fail_cl, depth},
              have_inc ? first_inc : first_fail);
    }
  }
}

struct CPair {
  Term a;
  Term b;
};
struct CPairHash {
  std::size_t operator()(const CPair& p) const {
    return static_cast<std::size_t>(hash_combine(term_hash(p.a), term_hash(p.b)));
  }
};
struct CPairEq {
  bool operator()(const CPair& x, const CPair& y) const {
    return equal(x.a, y.a) && equal(x.b, y.b);
  }
};

}  // namespace

SubstPool make_pool(const BindingSignature& sig, int max_size, bool value_only) {
  SubstPool p;
  p.by_sort.resize(sig.sorts.size());
  for (SortId s = 0; s < sig.sorts.size(); ++s) {
    const Coercion* into = sig.sorts.into(s);
    if (value_only && into) {
      for (const Term& v :
           enumerate_terms(sig, into->sub, sig.empty_context(), max_size)) {
        Term w = coerce_(sig, v);
        if (w->size <= max_size) p.by_sort[s].push_back({std::move(w), false});
      }
    } else {
      for (Term& t : enumerate_terms(sig, s, sig.empty_context(), max_size))
        p.by_sort[s].push_back({std::move(t), false});
    }
  }
  return p;
}

std::vector<Closing> closings(const BindingSignature& sig, const SubstPool& pool,
                              const Context& ctx) {
  Closing base{ctx, {}};
  base.map.resize(sig.sorts.size());
  std::vector<SortId> slots;
  for (SortId s = 0; s < sig.sorts.size(); ++s)
    for (int i = 0; i < ctx.counts[s]; ++i) slots.push_back(s);
  if (slots.empty()) return {base};
  for (SortId s : slots) {
    if (static_cast<std::size_t>(s) >= pool.by_sort.size() || pool.by_sort[s].empty())
      return {};
    for (const PoolEntry& e : pool.by_sort[s]) check_entry(sig, s, e);
  }
  std::vector<std::size_t> idx(slots.size(), 0);
  std::vector<Closing> out;
  for (;;) {
    Closing c = base;
    for (std::size_t k = 0; k < slots.size(); ++k)
      c.map[slots[k]].push_back(pool.by_sort[slots[k]][idx[k]]);
    out.push_back(std::move(c));
    std::size_t k = slots.size();
    while (k > 0 && ++idx[k - 1] == pool.by_sort[slots[k - 1]].size()) {
      idx[k - 1] = 0;
      --k;
    }
    if (k == 0) return out;
  }
}

Term apply_closing(const BindingSignature& sig, const Term& t, const Closing& c) {
  if (c.source.closed()) return t;
  NaiveView nv;
  nv.nctx = sig.empty_context();
  nv.entries.resize(sig.sorts.size());
  for (SortId s = 0; s < sig.sorts.size(); ++s) {
    if (c.map.size() <= static_cast<std::size_t>(s) ||
        static_cast<int>(c.map[s].size()) != c.source.counts[s])
      throw StructuralError("closing does not cover its context");
    for (const PoolEntry& e : c.map[s]) {
      check_entry(sig, s, e);
      if (e.program) {
        ++nv.nctx.counts[s];
        nv.entries[s].push_back(e);
      }
    }
  }
  Substitution sub{c.source, nv.nctx, {}};
  sub.map.resize(sig.sorts.size());
  std::vector<int> survivor(sig.sorts.size(), 0);
  for (SortId s = 0; s < sig.sorts.size(); ++s)
    for (const PoolEntry& e : c.map[s]) {
      if (e.program)
        sub.map[s].push_back(var_(s, declared_index(sig, nv.nctx, s, ++survivor[s])));
      else if (nv.nctx.closed())
        sub.map[s].push_back(e.term);
      else
        sub.map[s].push_back(
            weaken(sig, e.term, sig.empty_context(), nv.nctx, sig.empty_context()));
    }
  Term mid = substitute(sig, t, sub);
  if (nv.nctx.closed()) return mid;
  return strip_programs(sig, mid, nv, sig.empty_context());
}

const char* verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Holds:
      return "holds";
    case VerdictKind::Fails:
      return "fails";
    case VerdictKind::Inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

BisimSession::BisimSession(const DynamicSignature& dsig, SubstPool pool, int fuel)
    : dsig_(dsig), pool_(std::move(pool)), fuel_(fuel), eval_(dsig) {}

Verdict BisimSession::check(const Term& t1, const Term& t2, int depth) {
  if (t1->sort != t2->sort)
    throw StructuralError("bisimulation check needs terms of one sort");
  if (equal(t1, t2)) return {};
  if (depth <= 0) return {};
  Key key{t1, t2, depth};
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  Verdict fail, inconclusive;
  for (int l = 0; l < static_cast<int>(dsig_.labels.size()); ++l) {
    const Label& lb = dsig_.labels[l];
    if (lb.src_sort != t1->sort || !lb.src_ctx.closed()) continue;
    TransitionSet a = eval_.transitions(t1, l, fuel_);
    TransitionSet b = eval_.transitions(t2, l, fuel_);
    std::vector<Closing> cls = closings(dsig_.sig, pool_, lb.tgt_ctx);

    auto cand = [&](const Term& chal, const Term& resp,
                    bool from_left) -> std::pair<Verdict, std::optional<Closing>> {
      Verdict inc;
      std::optional<Closing> inc_cl;
      for (const Closing& c : cls) {
        const Term& lu = from_left ? chal : resp;
        const Term& rv = from_left ? resp : chal;
        Verdict sub = check(apply_closing(dsig_.sig, lu, c),
                            apply_closing(dsig_.sig, rv, c), depth - 1);
        if (sub.kind == VerdictKind::Fails) return {std::move(sub), c};
        if (sub.kind == VerdictKind::Inconclusive && inc.kind == VerdictKind::Holds) {
          inc = std::move(sub);
          inc_cl = c;
        }
      }
      return {std::move(inc), std::move(inc_cl)};
    };

    match_side(t1, t2, a, b, l, depth, true, cand, fail, inconclusive);
    if (fail.kind == VerdictKind::Fails) break;
    match_side(t1, t2, b, a, l, depth, false, cand, fail, inconclusive);
    if (fail.kind == VerdictKind::Fails) break;
    if (a.fuel_exhausted && inconclusive.kind == VerdictKind::Holds) {
      inconclusive.kind = VerdictKind::Inconclusive;
      inconclusive.trail = {Witness{t1, t2, true, l, nullptr, std::nullopt, depth}};
    }
    if (b.fuel_exhausted && inconclusive.kind == VerdictKind::Holds) {
      inconclusive.kind = VerdictKind::Inconclusive;
      inconclusive.trail = {Witness{t1, t2, false, l, nullptr, std::nullopt, depth}};
    }
  }

  Verdict out = fail.kind == VerdictKind::Fails          ? std::move(fail)
                : inconclusive.kind != VerdictKind::Holds ? std::move(inconclusive)
                                                          : Verdict{};
  memo_.emplace(key, out);
  return out;
}

Verdict BisimSession::applicative(const Term& t1, const Term& t2, int depth) {
  if (dsig_.labels.empty())
    throw StructuralError("applicative check needs an evaluation label");
  const Label& ev = dsig_.labels[0];
  if (t1->sort != ev.src_sort || t2->sort != ev.src_sort)
    throw StructuralError("applicative check expects terms at the evaluation sort");
  if (equal(t1, t2)) return {};
  if (depth <= 0) return {};
  Key key{t1, t2, depth};
  if (auto it = app_memo_.find(key); it != app_memo_.end()) return it->second;

  TransitionSet a = eval_.transitions(t1, 0, fuel_);
  TransitionSet b = eval_.transitions(t2, 0, fuel_);
  Verdict fail, inconclusive;
  auto cand = [&](const Term& chal, const Term& resp,
                  bool from_left) -> std::pair<Verdict, std::optional<Closing>> {
    const Term& lu = from_left ? chal : resp;
    const Term& rv = from_left ? resp : chal;
    return {value_rel(lu, rv, depth - 1), std::nullopt};
  };
  match_side(t1, t2, a, b, 0, depth, true, cand, fail, inconclusive);
  if (fail.kind != VerdictKind::Fails) {
    match_side(t1, t2, b, a, 0, depth, false, cand, fail, inconclusive);
    if (fail.kind != VerdictKind::Fails) {
      if (a.fuel_exhausted && inconclusive.kind == VerdictKind::Holds) {
        inconclusive.kind = VerdictKind::Inconclusive;
        inconclusive.trail = {Witness{t1, t2, true, 0, nullptr, std::nullopt, depth}};
      }
      if (b.fuel_exhausted && inconclusive.kind == VerdictKind::Holds) {
        inconclusive.kind = VerdictKind::Inconclusive;
        inconclusive.trail = {Witness{t1, t2, false, 0, nullptr, std::nullopt, depth}};
      }
    }
  }

  Verdict out = fail.kind == VerdictKind::Fails          ? std::move(fail)
                : inconclusive.kind != VerdictKind::Holds ? std::move(inconclusive)
                                                          : Verdict{};
  app_memo_.emplace(key, out);
  return out;
}

Verdict BisimSession::value_rel(const Term& v1, const Term& v2, int depth) {
  if (equal(v1, v2)) return {};
  if (depth <= 0) return {};
  Key key{v1, v2, depth};
  if (auto it = val_memo_.find(key); it != val_memo_.end()) return it->second;

  Verdict out;
  if (v1->tag != Tag::Op || v2->tag != Tag::Op || v1->index != v2->index ||
      v1->sort != v2->sort || dsig_.sig.op(v1->index).kind != OpKind::Value) {
    out.kind = VerdictKind::Fails;
    out.trail.push_back(Witness{v1, v2, true, -1, nullptr, std::nullopt, depth});
  } else {
    const Operator& o = dsig_.sig.op(v1->index);
    std::vector<ArgSpec> specs = dsig_.sig.arg_specs_at(v1->index, v1->sort);
    Verdict inconclusive;
    for (std::size_t i = 0;
         i < specs.size() && out.kind != VerdictKind::Fails; ++i) {
      if (static_cast<int>(i) < o.actives) {
        Verdict sub = value_rel(v1->args[i], v2->args[i], depth - 1);
        if (sub.kind == VerdictKind::Fails) {
          out.kind = VerdictKind::Fails;
          out.trail.clear();
          prepend(out, Witness{v1, v2, true, -1, v1->args[i], std::nullopt, depth}, sub);
        } else if (sub.kind == VerdictKind::Inconclusive &&
                   inconclusive.kind == VerdictKind::Holds) {
          inconclusive.kind = VerdictKind::Inconclusive;
          prepend(inconclusive,
                  Witness{v1, v2, true, -1, v1->args[i], std::nullopt, depth}, sub);
        }
      } else {
        for (const Closing& c : closings(dsig_.sig, pool_, specs[i].binds)) {
          Verdict sub = applicative(apply_closing(dsig_.sig, v1->args[i], c),
                                    apply_closing(dsig_.sig, v2->args[i], c), depth - 1);
          if (sub.kind == VerdictKind::Fails) {
            out.kind = VerdictKind::Fails;
            out.trail.clear();
            prepend(out, Witness{v1, v2, true, -1, v1->args[i], c, depth}, sub);
            break;
          }
          if (sub.kind == VerdictKind::Inconclusive &&
              inconclusive.kind == VerdictKind::Holds) {
            inconclusive.kind = VerdictKind::Inconclusive;
            prepend(inconclusive, Witness{v1, v2, true, -1, v1->args[i], c, depth}, sub);
          }
        }
      }
    }
    if (out.kind == VerdictKind::Holds &&
        inconclusive.kind != VerdictKind::Holds)
      out = std::move(inconclusive);
  }
  val_memo_.emplace(key, out);
  return out;
}

Verdict bounded_bisim(const DynamicSignature& dsig, const Term& t1, const Term& t2,
                      int depth, int fuel, const SubstPool& pool) {
  BisimSession s(dsig, pool, fuel);
  return s.check(t1, t2, depth);
}

Verdict applicative_bisim(const DynamicSignature& dsig, const Term& t1, const Term& t2,
                          int depth, int fuel, const SubstPool& pool) {
  BisimSession s(dsig, pool, fuel);
  return s.applicative(t1, t2, depth);
}

bool recheck_witness(const DynamicSignature& dsig, const Verdict& v, int fuel,
                     const SubstPool& pool) {
  if (v.kind == VerdictKind::Holds) return v.trail.empty();
  if (v.trail.empty()) return false;
  BisimSession s(dsig, pool, fuel);
  for (const Witness& w : v.trail) {
    if (!w.left || !w.right || w.left->sort != w.right->sort) return false;
    if (w.label >= 0 && w.target) {
      const Term& src = w.from_left ? w.left : w.right;
      TransitionSet ts = s.eval().transitions(src, w.label, fuel);
      bool found = false;
      for (const Term& u : ts.targets)
        if (equal(u, w.target)) {
          found = true;
          break;
        }
      if (!found) return false;
    }
    if (w.closing) {
      if (w.target) apply_closing(dsig.sig, w.target, *w.closing);
      apply_closing(dsig.sig, w.left, *w.closing);
      apply_closing(dsig.sig, w.right, *w.closing);
    }
  }
  for (std::size_t i = 1; i < v.trail.size(); ++i) {
    const Witness& w = v.trail[i];
    if (w.label < 0) continue;
    if (s.check(w.left, w.right, w.depth).kind == VerdictKind::Holds) return false;
  }
  const Witness& top = v.trail.front();
  if (top.label < 0) {
    // Closing frame from an open-pair check: replay on the closed instance.
    if (!top.closing) return false;
    Term a = apply_closing(dsig.sig, top.left, *top.closing);
    Term b = apply_closing(dsig.sig, top.right, *top.closing);
    // A bare closing frame records a relation-membership miss, which a fresh
    // session cannot reproduce; the structural checks above stand alone.
    if (v.trail.size() == 1) return v.kind == VerdictKind::Fails;
    return s.check(a, b, top.depth).kind == v.kind;
  }
  return s.check(top.left, top.right, top.depth).kind == v.kind;
}

void relation_insert(Relation& r, SortId sort, const Context& ctx, Term a, Term b) {
  for (RelationBlock& blk : r.blocks)
    if (blk.sort == sort && blk.ctx == ctx) {
      for (const auto& [x, y] : blk.pairs)
        if (equal(x, a) && equal(y, b)) return;
      blk.pairs.emplace_back(std::move(a), std::move(b));
      return;
    }
  r.blocks.push_back({sort, ctx, {{std::move(a), std::move(b)}}});
}

bool relation_contains(const Relation& r, SortId sort, const Context& ctx,
                       const Term& a, const Term& b) {
  for (const RelationBlock& blk : r.blocks)
    if (blk.sort == sort && blk.ctx == ctx)
      for (const auto& [x, y] : blk.pairs)
        if (equal(x, a) && equal(y, b)) return true;
  return false;
}

RelationReport check_relation(const DynamicSignature& dsig, const Relation& r, int fuel,
                              const SubstPool& pool) {
  std::vector<CPair> inst;
  std::unordered_set<CPair, CPairHash, CPairEq> member;
  auto add = [&](Term a, Term b) {
    CPair p{std::move(a), std::move(b)};
    if (member.insert(p).second) inst.push_back(std::move(p));
  };
  for (const RelationBlock& blk : r.blocks)
    for (const auto& [a, b] : blk.pairs) {
      well_formed(dsig.sig, a, blk.ctx, blk.sort);
      well_formed(dsig.sig, b, blk.ctx, blk.sort);
      if (blk.ctx.closed()) {
        add(a, b);
      } else {
        for (const Closing& c : closings(dsig.sig, pool, blk.ctx))
          add(apply_closing(dsig.sig, a, c), apply_closing(dsig.sig, b, c));
      }
    }

  RelationReport rep;
  EvalSession ev(dsig);
  for (const CPair& p : inst) {
    for (int l = 0; l < static_cast<int>(dsig.labels.size()); ++l) {
      const Label& lb = dsig.labels[l];
      if (lb.src_sort != p.a->sort || !lb.src_ctx.closed()) continue;
      TransitionSet a = ev.transitions(p.a, l, fuel);
      TransitionSet b = ev.transitions(p.b, l, fuel);
      std::vector<Closing> cls = closings(dsig.sig, pool, lb.tgt_ctx);

      auto run = [&](const TransitionSet& chal, const TransitionSet& resp,
                     bool from_left) {
        for (const Term& u : chal.targets) {
          bool matched = false;
          std::optional<Closing> bad_cl;
          std::optional<std::pair<Term, Term>> escaped;
          for (const Term& v : resp.targets) {
            bool ok = true;
            for (const Closing& c : cls) {
              Term lu = apply_closing(dsig.sig, from_left ? u : v, c);
              Term rv = apply_closing(dsig.sig, from_left ? v : u, c);
              if (!member.count(CPair{lu, rv})) {
                ok = false;
                if (!escaped) {
                  escaped = std::make_pair(lu, rv);
                  bad_cl = c;
                }
                break;
              }
            }
            if (ok) {
              matched = true;
              break;
            }
          }
          if (matched) continue;
          RelationIssue issue;
          issue.definite = !resp.fuel_exhausted;
          issue.left = p.a;
          issue.right = p.b;
          issue.from_left = from_left;
          issue.label = l;
          issue.target = u;
          issue.closing = bad_cl;
          issue.escaped = escaped;
          rep.issues.push_back(std::move(issue));
        }
        if (chal.fuel_exhausted) {
          RelationIssue issue;
          issue.definite = false;
          issue.left = p.a;
          issue.right = p.b;
          issue.from_left = from_left;
          issue.label = l;
          rep.issues.push_back(std::move(issue));
        }
      };
      run(a, b, true);
      run(b, a, false);
    }
  }
  for (const RelationIssue& i : rep.issues) (i.definite ? rep.definite_count
                                                        : rep.inconclusive_count)++;
  rep.bisimulation = rep.issues.empty();
  return rep;
}

Verdict open_extension_check(const DynamicSignature& dsig, const Relation* r_closed,
                             const Term& e1, const Term& e2, const Context& ctx,
                             const SubstPool& pool, int depth, int fuel) {
  if (e1->sort != e2->sort)
    throw StructuralError("open extension needs terms of one sort");
  well_formed(dsig.sig, e1, ctx, e1->sort);
  well_formed(dsig.sig, e2, ctx, e2->sort);
  BisimSession s(dsig, pool, fuel);
  Verdict inconclusive;
  for (const Closing& c : closings(dsig.sig, pool, ctx)) {
    Term a = apply_closing(dsig.sig, e1, c);
    Term b = apply_closing(dsig.sig, e2, c);
    if (r_closed) {
      if (!relation_contains(*r_closed, a->sort, dsig.sig.empty_context(), a, b)) {
        Verdict out;
        out.kind = VerdictKind::Fails;
        out.trail.push_back(Witness{e1, e2, true, -1, nullptr, c, depth});
        return out;
      }
      continue;
    }
    Verdict sub = s.check(a, b, depth);
    if (sub.kind == VerdictKind::Fails) {
      Verdict out;
      out.kind = VerdictKind::Fails;
      prepend(out, Witness{e1, e2, true, -1, nullptr, c, depth}, sub);
      return out;
    }
    if (sub.kind == VerdictKind::Inconclusive &&
        inconclusive.kind == VerdictKind::Holds) {
      inconclusive.kind = VerdictKind::Inconclusive;
      prepend(inconclusive, Witness{e1, e2, true, -1, nullptr, c, depth}, sub);
    }
  }
  return inconclusive;
}

Relation stratified_bisimilarity(const DynamicSignature& dsig, SortId sort, int max_size,
                                 int depth, int fuel, const SubstPool& pool) {
  std::vector<Term> universe =
      enumerate_terms(dsig.sig, sort, dsig.sig.empty_context(), max_size);
  BisimSession s(dsig, pool, fuel);
  Relation r;
  for (const Term& t1 : universe)
    for (const Term& t2 : universe)
      if (s.check(t1, t2, depth).kind == VerdictKind::Holds)
        relation_insert(r, sort, dsig.sig.empty_context(), t1, t2);
  return r;
}

}  // namespace opsem
