#include "opsem/howe.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "opsem/sigfile.hpp"

namespace opsem {

namespace {

int supply_index(const BindingSignature& sig, const Context& c, SortId s, int declared) {
  const Coercion* into = sig.sorts.into(s);
  if (into && into->counterpart) return c.counts[into->sub] + declared;
  return declared;
}

struct PairKey {
  Term a;
  Term b;
};
struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const {
    return static_cast<std::size_t>(hash_combine(term_hash(k.a), term_hash(k.b)));
  }
};
struct PairKeyEq {
  bool operator()(const PairKey& x, const PairKey& y) const {
    return equal(x.a, y.a) && equal(x.b, y.b);
  }
};
using PairSet = std::unordered_set<PairKey, PairKeyHash, PairKeyEq>;

using BlockKey = std::pair<SortId, std::vector<int>>;

std::map<BlockKey, int> index_blocks(const Universe& u) {
  std::map<BlockKey, int> out;
  for (std::size_t i = 0; i < u.blocks.size(); ++i)
    out.emplace(BlockKey{u.blocks[i].sort, u.blocks[i].ctx.counts}, static_cast<int>(i));
  return out;
}

// Saturation state shared by howe_closure and howe_step_additions.
struct ClosureEngine {
  const DynamicSignature& dsig;
  const Universe& u;
  const BaseOracle& oracle;
  std::map<BlockKey, int> block_of;
  std::vector<PairSet> sets;
  std::vector<std::vector<std::pair<Term, Term>>> pairs;
  // per block: (tag, op index, annotation) -> candidate witnesses
  std::vector<std::map<std::tuple<int, int, int>, std::vector<const Term*>>> groups;
  std::map<std::tuple<int, int, SortId>, std::vector<int>> arg_blocks;

  ClosureEngine(const DynamicSignature& d, const Universe& uni, const BaseOracle& b)
      : dsig(d), u(uni), oracle(b), block_of(index_blocks(uni)) {
    sets.resize(u.blocks.size());
    pairs.resize(u.blocks.size());
    groups.resize(u.blocks.size());
    for (std::size_t i = 0; i < u.blocks.size(); ++i)
      for (const Term& t : u.blocks[i].terms)
        if (t->tag == Tag::Op || t->tag == Tag::Coerce)
          groups[i][{static_cast<int>(t->tag), t->tag == Tag::Op ? t->index : 0, t->sort}]
              .push_back(&t);
  }

  int block_id(SortId s, const Context& c) const {
    auto it = block_of.find(BlockKey{s, c.counts});
    if (it == block_of.end()) throw StructuralError("universe block missing");
    return it->second;
  }

  bool related(int blk, const Term& x, const Term& y) const {
    return sets[blk].count(PairKey{x, y}) > 0;
  }

  const std::vector<int>& arg_block_ids(int blk, int op, SortId ann) {
    auto key = std::make_tuple(blk, op, ann);
    auto it = arg_blocks.find(key);
    if (it != arg_blocks.end()) return it->second;
    std::vector<int> ids;
    for (const ArgSpec& spec : dsig.sig.arg_specs_at(op, ann))
      ids.push_back(block_id(spec.sort, dsig.sig.extend(u.blocks[blk].ctx, spec.binds)));
    return arg_blocks.emplace(key, std::move(ids)).first->second;
  }

  bool args_related(int blk, const Term& e, const Term& f) {
    if (e->tag == Tag::Coerce) {
      const Coercion* co = dsig.sig.sorts.into(e->sort);
      return related(block_id(co->sub, u.blocks[blk].ctx), e->args[0], f->args[0]);
    }
    const std::vector<int>& ids = arg_block_ids(blk, e->index, e->sort);
    for (std::size_t j = 0; j < ids.size(); ++j)
      if (!related(ids[j], e->args[j], f->args[j])) return false;
    return true;
  }

  bool clause(int blk, const Term& e, const Term& e2) {
    const UniverseBlock& ub = u.blocks[blk];
    if (e->tag == Tag::Var) return oracle(ub.sort, ub.ctx, e, e2);
    auto git = groups[blk].find(
        {static_cast<int>(e->tag), e->tag == Tag::Op ? e->index : 0, e->sort});
    if (git == groups[blk].end()) return false;
    for (const Term* f : git->second)
      if (args_related(blk, e, *f) && oracle(ub.sort, ub.ctx, *f, e2)) return true;
    return false;
  }

  int pass(bool insert) {
    int added = 0;
    for (std::size_t blk = 0; blk < u.blocks.size(); ++blk) {
      const std::vector<Term>& terms = u.blocks[blk].terms;
      for (const Term& e : terms)
        for (const Term& e2 : terms) {
          if (related(static_cast<int>(blk), e, e2)) continue;
          if (!clause(static_cast<int>(blk), e, e2)) continue;
          ++added;
          if (insert) {
            sets[blk].insert(PairKey{e, e2});
            pairs[blk].emplace_back(e, e2);
          }
        }
    }
    return added;
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (const PairSet& s : sets) n += s.size();
    return n;
  }

  void seed(const Relation& h) {
    for (const RelationBlock& blk : h.blocks) {
      int id = block_id(blk.sort, blk.ctx);
      for (const auto& [a, b] : blk.pairs) {
        if (sets[id].insert(PairKey{a, b}).second) pairs[id].emplace_back(a, b);
      }
    }
  }

  Relation relation() const {
    Relation r;
    for (std::size_t i = 0; i < u.blocks.size(); ++i)
      r.blocks.push_back({u.blocks[i].sort, u.blocks[i].ctx, pairs[i]});
    return r;
  }
};

// Pair sets over a relation's blocks, for membership-heavy sweeps.
struct RelationIndex {
  std::map<BlockKey, PairSet> by_block;

  explicit RelationIndex(const Relation& r) {
    for (const RelationBlock& blk : r.blocks) {
      PairSet& s = by_block[BlockKey{blk.sort, blk.ctx.counts}];
      for (const auto& [a, b] : blk.pairs) s.insert(PairKey{a, b});
    }
  }
  bool contains(SortId sort, const Context& ctx, const Term& a, const Term& b) const {
    auto it = by_block.find(BlockKey{sort, ctx.counts});
    return it != by_block.end() && it->second.count(PairKey{a, b}) > 0;
  }
};

nlohmann::json term_json(const BindingSignature& sig, const Term& t, const Context& ctx) {
  if (!t) return nullptr;
  return print_term(sig, t, ctx);
}

}  // namespace

const UniverseBlock* Universe::block(SortId sort, const Context& ctx) const {
  for (const UniverseBlock& b : blocks)
    if (b.sort == sort && b.ctx == ctx) return &b;
  return nullptr;
}

bool Universe::contains(SortId sort, const Context& ctx, const Term& t) const {
  const UniverseBlock* b = block(sort, ctx);
  if (!b || t->size > b->max_size) return false;
  for (const Term& x : b->terms)
    if (equal(x, t)) return true;
  return false;
}

std::size_t Universe::term_count() const {
  std::size_t n = 0;
  for (const UniverseBlock& b : blocks) n += b.terms.size();
  return n;
}

Universe make_universe(const BindingSignature& sig, int max_size, int ctx_bound) {
  if (max_size < 1) throw StructuralError("universe size bound must be positive");
  if (ctx_bound < 0) throw StructuralError("universe context bound must be nonnegative");

  std::map<BlockKey, int> best;
  std::deque<std::tuple<SortId, Context, int>> queue;

  std::vector<int> counts(sig.sorts.size(), 0);
  auto seed_ctxs = [&](auto&& self, std::size_t at) -> void {
    if (at == counts.size()) {
      for (SortId s = 0; s < sig.sorts.size(); ++s)
        queue.emplace_back(s, Context{counts}, max_size);
      return;
    }
    for (int n = 0; n <= ctx_bound; ++n) {
      counts[at] = n;
      self(self, at + 1);
    }
    counts[at] = 0;
  };
  seed_ctxs(seed_ctxs, 0);

  while (!queue.empty()) {
    auto [s, ctx, bound] = queue.front();
    queue.pop_front();
    BlockKey key{s, ctx.counts};
    auto it = best.find(key);
    if (it != best.end() && it->second >= bound) continue;
    best[key] = bound;
    if (bound < 2) continue;
    const Coercion* into = sig.sorts.into(s);
    if (into && !into->counterpart) queue.emplace_back(into->sub, ctx, bound - 1);
    for (std::size_t id = 0; id < sig.ops.size(); ++id) {
      const Operator& op = sig.ops[id];
      bool at_s = op.result == s ||
                  (into && into->counterpart && op.result == into->sub &&
                   op.kind == OpKind::Value);
      if (!at_s) continue;
      for (const ArgSpec& spec : sig.arg_specs_at(static_cast<int>(id), s))
        queue.emplace_back(spec.sort, sig.extend(ctx, spec.binds), bound - 1);
    }
  }

  Universe u;
  for (const auto& [key, bound] : best) {
    UniverseBlock blk{key.first, Context{key.second}, bound, {}};
    blk.terms = enumerate_terms(sig, blk.sort, blk.ctx, bound);
    u.blocks.push_back(std::move(blk));
  }
  return u;
}

BaseOracle equality_oracle() {
  return [](SortId, const Context&, const Term& a, const Term& b) { return equal(a, b); };
}

namespace {

struct OracleKey {
  Term a;
  Term b;
  std::vector<int> ctx;
};
struct OracleKeyHash {
  std::size_t operator()(const OracleKey& k) const {
    std::uint64_t h = hash_combine(term_hash(k.a), term_hash(k.b));
    for (int n : k.ctx) h = hash_combine(h, static_cast<std::uint64_t>(n));
    return static_cast<std::size_t>(h);
  }
};
struct OracleKeyEq {
  bool operator()(const OracleKey& x, const OracleKey& y) const {
    return x.ctx == y.ctx && equal(x.a, y.a) && equal(x.b, y.b);
  }
};

struct BisimOracleState {
  BisimSession session;
  int depth;
  std::map<std::vector<int>, std::vector<Closing>> closings_cache;
  std::unordered_map<OracleKey, bool, OracleKeyHash, OracleKeyEq> memo;

  BisimOracleState(const DynamicSignature& dsig, SubstPool pool, int fuel, int depth_)
      : session(dsig, std::move(pool), fuel), depth(depth_) {}
};

}  // namespace

BaseOracle bisim_oracle(const DynamicSignature& dsig, SubstPool pool, int depth, int fuel) {
  auto st = std::make_shared<BisimOracleState>(dsig, std::move(pool), fuel, depth);
  return [st](SortId, const Context& ctx, const Term& a, const Term& b) {
    if (equal(a, b)) return true;
    OracleKey key{a, b, ctx.counts};
    auto hit = st->memo.find(key);
    if (hit != st->memo.end()) return hit->second;
    const BindingSignature& sig = st->session.dsig().sig;
    auto cit = st->closings_cache.find(ctx.counts);
    if (cit == st->closings_cache.end())
      cit = st->closings_cache.emplace(ctx.counts, closings(sig, st->session.pool(), ctx))
                .first;
    bool ok = true;
    for (const Closing& c : cit->second) {
      Term ca = apply_closing(sig, a, c);
      Term cb = apply_closing(sig, b, c);
      if (st->session.check(ca, cb, st->depth).kind != VerdictKind::Holds) {
        ok = false;
        break;
      }
    }
    st->memo.emplace(std::move(key), ok);
    return ok;
  };
}

Relation howe_closure(const DynamicSignature& dsig, const Universe& u, const BaseOracle& b,
                      FixpointStats* stats) {
  ClosureEngine eng(dsig, u, b);
  if (stats) *stats = {};
  for (;;) {
    int added = eng.pass(true);
    if (stats) {
      ++stats->iterations;
      stats->sizes.push_back(eng.total());
    }
    if (added == 0) break;
  }
  return eng.relation();
}

int howe_step_additions(const DynamicSignature& dsig, const Universe& u, const BaseOracle& b,
                        const Relation& h) {
  ClosureEngine eng(dsig, u, b);
  eng.seed(h);
  return eng.pass(false);
}

CompositionReport composition_check(const DynamicSignature& dsig, const Universe& u,
                                    const Relation& h, const BaseOracle& b) {
  CompositionReport rep;
  RelationIndex idx(h);
  for (const RelationBlock& blk : h.blocks) {
    const UniverseBlock* ub = u.block(blk.sort, blk.ctx);
    if (!ub) throw StructuralError("universe block missing");
    for (const auto& [a, mid] : blk.pairs)
      for (const Term& c : ub->terms) {
        ++rep.checked;
        if (!b(blk.sort, blk.ctx, mid, c)) continue;
        if (!idx.contains(blk.sort, blk.ctx, a, c)) {
          rep.ok = false;
          rep.issues.push_back({blk.sort, blk.ctx, a, mid, c});
        }
      }
  }
  (void)dsig;
  return rep;
}

SubstitutionReport hetero_substitution_check(const DynamicSignature& dsig, const Universe& u,
                                             const Relation& h, int n_samples,
                                             std::uint64_t seed) {
  const BindingSignature& sig = dsig.sig;
  SubstitutionReport rep;
  RelationIndex idx(h);

  // (pair block, variable sort, block of the substituted pair)
  struct Slot {
    const RelationBlock* host = nullptr;
    SortId var_sort = 0;
    const RelationBlock* filler = nullptr;
    Context reduced;
  };
  std::vector<Slot> slots;
  auto find_block = [&](SortId s, const Context& c) -> const RelationBlock* {
    for (const RelationBlock& blk : h.blocks)
      if (blk.sort == s && blk.ctx == c) return &blk;
    return nullptr;
  };
  for (const RelationBlock& blk : h.blocks) {
    if (blk.pairs.empty()) continue;
    for (SortId s = 0; s < sig.sorts.size(); ++s) {
      if (blk.ctx.counts[s] < 1) continue;
      Context reduced = blk.ctx;
      --reduced.counts[s];
      const RelationBlock* filler = find_block(s, reduced);
      if (!filler || filler->pairs.empty()) continue;
      if (!u.block(blk.sort, reduced)) continue;
      slots.push_back({&blk, s, filler, reduced});
    }
  }
  if (slots.empty()) {
    rep.samples = 0;
    return rep;
  }

  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_samples; ++i) {
    ++rep.samples;
    const Slot& slot = slots[rng() % slots.size()];
    const auto& [e1, e1p] = slot.host->pairs[rng() % slot.host->pairs.size()];
    const auto& [e2, e2p] = slot.filler->pairs[rng() % slot.filler->pairs.size()];

    int j = slot.host->ctx.counts[slot.var_sort];
    auto subst_last = [&](const Term& body, const Term& image) {
      Substitution sub;
      sub.source = slot.host->ctx;
      sub.target = slot.reduced;
      sub.map.resize(sig.sorts.size());
      for (SortId s = 0; s < sig.sorts.size(); ++s)
        for (int k = 1; k <= slot.host->ctx.counts[s]; ++k)
          sub.map[s].push_back(s == slot.var_sort && k == j
                                   ? image
                                   : var_(s, supply_index(sig, slot.reduced, s, k)));
      return substitute(sig, body, sub);
    };
    Term r1 = subst_last(e1, e2);
    Term r2 = subst_last(e1p, e2p);
    if (!u.contains(slot.host->sort, slot.reduced, r1) ||
        !u.contains(slot.host->sort, slot.reduced, r2)) {
      ++rep.skipped;
      continue;
    }
    ++rep.applied;
    if (!idx.contains(slot.host->sort, slot.reduced, r1, r2)) {
      rep.ok = false;
      rep.violations.push_back(
          {slot.host->sort, slot.reduced, slot.var_sort, e1, e1p, e2, e2p, r1, r2});
    }
  }
  return rep;
}

namespace {

// Semi-naive saturation of one block's pair set.
std::vector<std::pair<Term, Term>> close_block(const std::vector<std::pair<Term, Term>>& in) {
  std::vector<std::pair<Term, Term>> all;
  PairSet seen;
  std::unordered_map<Term, std::vector<int>, TermHash, TermEq> by_left, by_right;
  std::deque<int> work;
  // by value: the arguments may alias entries of `all`, which reallocates
  auto add = [&](Term a, Term b) {
    if (!seen.insert(PairKey{a, b}).second) return;
    int id = static_cast<int>(all.size());
    by_left[a].push_back(id);
    by_right[b].push_back(id);
    all.emplace_back(std::move(a), std::move(b));
    work.push_back(id);
  };
  for (const auto& [a, b] : in) add(a, b);
  while (!work.empty()) {
    auto [a, b] = all[work.front()];
    work.pop_front();
    if (auto it = by_left.find(b); it != by_left.end()) {
      std::vector<int> ids = it->second;
      for (int id : ids) add(a, all[id].second);
    }
    if (auto it = by_right.find(a); it != by_right.end()) {
      std::vector<int> ids = it->second;
      for (int id : ids) add(all[id].first, b);
    }
  }
  return all;
}

}  // namespace

Relation transitive_closure(const Relation& r) {
  Relation out;
  for (const RelationBlock& blk : r.blocks)
    out.blocks.push_back({blk.sort, blk.ctx, close_block(blk.pairs)});
  return out;
}

Relation relational_transitive_closure(const Relation& r) {
  Relation out;
  for (const RelationBlock& blk : r.blocks) {
    std::unordered_map<Term, std::vector<Term>, TermHash, TermEq> step;
    for (const auto& [a, b] : blk.pairs) step[a].push_back(b);

    PairSet seen;
    std::vector<std::pair<Term, Term>> acc;
    auto add = [&](const Term& a, const Term& b) {
      if (seen.insert(PairKey{a, b}).second) acc.emplace_back(a, b);
    };
    for (const auto& [a, b] : blk.pairs) add(a, b);

    std::vector<std::pair<Term, Term>> power = blk.pairs;
    while (!power.empty()) {
      std::vector<std::pair<Term, Term>> next;
      PairSet next_seen;
      for (const auto& [a, mid] : power) {
        auto it = step.find(mid);
        if (it == step.end()) continue;
        for (const Term& c : it->second)
          if (!seen.count(PairKey{a, c}) && next_seen.insert(PairKey{a, c}).second)
            next.emplace_back(a, c);
      }
      for (const auto& [a, c] : next) add(a, c);
      power = std::move(next);
    }
    out.blocks.push_back({blk.sort, blk.ctx, std::move(acc)});
  }
  return out;
}

SymmetryReport symmetry_check(const Relation& r) {
  RelationIndex idx(r);
  for (const RelationBlock& blk : r.blocks)
    for (const auto& [a, b] : blk.pairs)
      if (!idx.contains(blk.sort, blk.ctx, b, a))
        return {false, blk.sort, blk.ctx, b, a};
  return {};
}

SimulationReport simulation_check(const DynamicSignature& dsig, const Universe& u,
                                  const Relation& h, int fuel, const SubstPool& pool) {
  SimulationReport rep;
  RelationIndex idx(h);
  EvalSession eval(dsig);
  Context closed = dsig.sig.empty_context();
  std::map<int, std::vector<Closing>> label_closings;

  for (const RelationBlock& blk : h.blocks) {
    if (!blk.ctx.closed()) continue;
    std::vector<int> applicable;
    for (std::size_t l = 0; l < dsig.labels.size(); ++l)
      if (dsig.labels[l].src_sort == blk.sort && dsig.labels[l].src_ctx == blk.ctx)
        applicable.push_back(static_cast<int>(l));
    if (applicable.empty()) continue;

    for (const auto& [e, ep] : blk.pairs) {
      ++rep.pairs;
      for (int l : applicable) {
        const Label& lab = dsig.labels[l];
        auto cit = label_closings.find(l);
        if (cit == label_closings.end())
          cit = label_closings.emplace(l, closings(dsig.sig, pool, lab.tgt_ctx)).first;

        TransitionSet ts = eval.transitions(e, l, fuel);
        TransitionSet rs = eval.transitions(ep, l, fuel);
        if (ts.fuel_exhausted) {
          ++rep.inconclusive_count;
          rep.issues.push_back({false, e, ep, true, l, nullptr, std::nullopt, std::nullopt});
        }
        for (const Term& challenge : ts.targets) {
          bool matched = false;
          bool out_of_universe = false;
          for (const Term& answer : rs.targets) {
            bool all_in = true;
            bool unusable = false;
            for (const Closing& c : cit->second) {
              Term cu = apply_closing(dsig.sig, challenge, c);
              Term cv = apply_closing(dsig.sig, answer, c);
              if (!u.contains(lab.tgt_sort, closed, cu) ||
                  !u.contains(lab.tgt_sort, closed, cv)) {
                unusable = true;
                break;
              }
              if (!idx.contains(lab.tgt_sort, closed, cu, cv)) {
                all_in = false;
                break;
              }
            }
            if (unusable) {
              out_of_universe = true;
              continue;
            }
            if (all_in) {
              matched = true;
              break;
            }
          }
          if (matched) continue;
          bool definite = !out_of_universe && !rs.fuel_exhausted;
          rep.issues.push_back(
              {definite, e, ep, true, l, challenge, std::nullopt, std::nullopt});
          if (definite) {
            ++rep.definite_count;
            rep.ok = false;
          } else {
            ++rep.inconclusive_count;
          }
        }
      }
    }
  }
  return rep;
}

HoleContexts one_hole_contexts(const BindingSignature& sig, SortId hole_sort, SortId root_sort,
                               int max_size) {
  HoleContexts hc;
  hc.extended = sig;
  hc.hole_sort = hole_sort;
  hc.root_sort = root_sort;
  std::string name = "hole";
  for (int n = 1; hc.extended.op_id(name); ++n) name = "hole" + std::to_string(n);
  hc.extended.ops.push_back({name, hole_sort, {}, OpKind::Plain, 0});
  hc.hole_op = static_cast<int>(hc.extended.ops.size()) - 1;

  auto count_holes = [&](auto&& self, const Term& t) -> int {
    int n = t->tag == Tag::Op && t->index == hc.hole_op ? 1 : 0;
    for (const Term& a : t->args) n += self(self, a);
    return n;
  };
  for (Term& t :
       enumerate_terms(hc.extended, root_sort, hc.extended.empty_context(), max_size))
    if (count_holes(count_holes, t) == 1) hc.contexts.push_back(std::move(t));
  return hc;
}

Term plug(const BindingSignature& sig, const HoleContexts& hc, const Term& context,
          const Term& filler) {
  well_formed(sig, filler, sig.empty_context(), hc.hole_sort);
  Context empty = sig.empty_context();
  auto go = [&](auto&& self, const Term& t, const Context& acc) -> Term {
    if (t->tag == Tag::Op && t->index == hc.hole_op)
      return weaken(sig, filler, empty, acc, empty);
    switch (t->tag) {
      case Tag::Var:
        return var_(t->sort, t->index);
      case Tag::Coerce:
        return coerce_(sig, self(self, t->args[0], acc));
      case Tag::Op: {
        std::vector<ArgSpec> specs = hc.extended.arg_specs_at(t->index, t->sort);
        std::vector<Term> args;
        for (std::size_t j = 0; j < specs.size(); ++j)
          args.push_back(self(self, t->args[j],
                              specs[j].binds.closed() ? acc
                                                      : sig.extend(acc, specs[j].binds)));
        return op_(sig, t->index, t->sort, std::move(args));
      }
      case Tag::Meta:
        throw StructuralError("metavariable in a one-hole context");
    }
    throw StructuralError("unreachable");
  };
  return go(go, context, empty);
}

CongruenceReport congruence_sweep(const DynamicSignature& dsig, const CongruenceParams& p) {
  if (dsig.labels.empty()) throw StructuralError("congruence sweep needs a label");
  CongruenceReport rep;
  SortId sort = dsig.labels[0].src_sort;
  int check_depth = p.check_depth < 0 ? std::max(0, p.depth - 1) : p.check_depth;

  Relation related =
      stratified_bisimilarity(dsig, sort, p.max_size, p.depth, p.fuel, p.pool);
  const std::vector<std::pair<Term, Term>>* pool_pairs = nullptr;
  for (const RelationBlock& blk : related.blocks)
    if (blk.sort == sort && blk.ctx.closed()) pool_pairs = &blk.pairs;
  HoleContexts hc = one_hole_contexts(dsig.sig, sort, sort, p.hole_size);

  rep.pair_population = pool_pairs ? static_cast<int>(pool_pairs->size()) : 0;
  rep.context_population = static_cast<int>(hc.contexts.size());
  if (rep.pair_population == 0 || rep.context_population == 0) return rep;

  BisimSession session(dsig, p.pool, p.fuel);
  std::mt19937_64 rng(p.seed);
  for (int i = 0; i < p.n_samples; ++i) {
    ++rep.samples;
    const auto& [t1, t2] = (*pool_pairs)[rng() % pool_pairs->size()];
    const Term& ctx_term = hc.contexts[rng() % hc.contexts.size()];
    Term c1 = plug(dsig.sig, hc, ctx_term, t1);
    Term c2 = plug(dsig.sig, hc, ctx_term, t2);
    VerdictKind after = session.check(c1, c2, check_depth).kind;
    if (after == VerdictKind::Holds) {
      ++rep.holds;
    } else if (after == VerdictKind::Inconclusive) {
      ++rep.inconclusive;
    } else {
      rep.ok = false;
      rep.counterexamples.push_back(
          {t1, t2, print_term(hc.extended, ctx_term, dsig.sig.empty_context()), c1, c2,
           after});
    }
  }
  return rep;
}

std::string json_report(const DynamicSignature& dsig, const FixpointStats& stats) {
  (void)dsig;
  nlohmann::json j;
  j["iterations"] = stats.iterations;
  j["sizes"] = stats.sizes;
  return j.dump(2);
}

std::string json_report(const DynamicSignature& dsig, const CompositionReport& rep) {
  nlohmann::json j;
  j["ok"] = rep.ok;
  j["checked"] = rep.checked;
  j["issues"] = nlohmann::json::array();
  for (const CompositionIssue& is : rep.issues)
    j["issues"].push_back({{"sort", dsig.sig.sorts.name(is.sort)},
                           {"context", print_context_spec(dsig.sig, is.ctx)},
                           {"left", term_json(dsig.sig, is.left, is.ctx)},
                           {"mid", term_json(dsig.sig, is.mid, is.ctx)},
                           {"right", term_json(dsig.sig, is.right, is.ctx)}});
  return j.dump(2);
}

std::string json_report(const DynamicSignature& dsig, const SubstitutionReport& rep) {
  nlohmann::json j;
  j["ok"] = rep.ok;
  j["samples"] = rep.samples;
  j["applied"] = rep.applied;
  j["skipped"] = rep.skipped;
  j["violations"] = nlohmann::json::array();
  for (const SubstitutionSample& v : rep.violations) {
    Context host = v.ctx;
    ++host.counts[v.var_sort];
    j["violations"].push_back({{"sort", dsig.sig.sorts.name(v.sort)},
                               {"context", print_context_spec(dsig.sig, v.ctx)},
                               {"var_sort", dsig.sig.sorts.name(v.var_sort)},
                               {"left", term_json(dsig.sig, v.e1, host)},
                               {"right", term_json(dsig.sig, v.e1p, host)},
                               {"image_left", term_json(dsig.sig, v.e2, v.ctx)},
                               {"image_right", term_json(dsig.sig, v.e2p, v.ctx)},
                               {"result_left", term_json(dsig.sig, v.r1, v.ctx)},
                               {"result_right", term_json(dsig.sig, v.r2, v.ctx)}});
  }
  return j.dump(2);
}

std::string json_report(const DynamicSignature& dsig, const SymmetryReport& rep) {
  nlohmann::json j;
  j["ok"] = rep.ok;
  if (!rep.ok) {
    j["sort"] = dsig.sig.sorts.name(rep.sort);
    j["context"] = print_context_spec(dsig.sig, rep.ctx);
    j["missing_left"] = term_json(dsig.sig, rep.left, rep.ctx);
    j["missing_right"] = term_json(dsig.sig, rep.right, rep.ctx);
  }
  return j.dump(2);
}

std::string json_report(const DynamicSignature& dsig, const SimulationReport& rep) {
  nlohmann::json j;
  j["ok"] = rep.ok;
  j["pairs"] = rep.pairs;
  j["definite"] = rep.definite_count;
  j["inconclusive"] = rep.inconclusive_count;
  j["issues"] = nlohmann::json::array();
  for (const RelationIssue& is : rep.issues) {
    Context closed = dsig.sig.empty_context();
    j["issues"].push_back(
        {{"definite", is.definite},
         {"left", term_json(dsig.sig, is.left, closed)},
         {"right", term_json(dsig.sig, is.right, closed)},
         {"label", dsig.labels[is.label].name},
         {"target", is.target ? term_json(dsig.sig, is.target, dsig.labels[is.label].tgt_ctx)
                              : nlohmann::json(nullptr)}});
  }
  return j.dump(2);
}

std::string json_report(const DynamicSignature& dsig, const CongruenceReport& rep) {
  nlohmann::json j;
  j["ok"] = rep.ok;
  j["pair_population"] = rep.pair_population;
  j["context_population"] = rep.context_population;
  j["samples"] = rep.samples;
  j["holds"] = rep.holds;
  j["inconclusive"] = rep.inconclusive;
  j["counterexamples"] = nlohmann::json::array();
  Context closed = dsig.sig.empty_context();
  for (const CongruenceCase& c : rep.counterexamples)
    j["counterexamples"].push_back({{"left", term_json(dsig.sig, c.left, closed)},
                                    {"right", term_json(dsig.sig, c.right, closed)},
                                    {"context", c.context},
                                    {"plugged_left", term_json(dsig.sig, c.plugged_left, closed)},
                                    {"plugged_right", term_json(dsig.sig, c.plugged_right, closed)},
                                    {"after", verdict_name(c.after)}});
  return j.dump(2);
}

}  // namespace opsem
