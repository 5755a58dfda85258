#pragma once

#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "opsem/eval.hpp"

namespace opsem {

// One candidate for closing a free variable. A program entry carries a term
// of the coercion super sort; it applies at coercion occurrences of the
// variable only, and a bare occurrence is a structural error.
struct PoolEntry {
  Term term;
  bool program = false;
};

// Finite surrogate for quantification over closing substitutions: per sort,
// the terms a free variable of that sort ranges over.
struct SubstPool {
  std::vector<std::vector<PoolEntry>> by_sort;
};

// Closed terms of each sort up to max_size nodes. With value_only, sorts
// with an incoming coercion draw coerced values instead of arbitrary terms.
SubstPool make_pool(const BindingSignature& sig, int max_size, bool value_only);

// One closing of a context: map[s][i-1] closes declared variable i of sort s.
struct Closing {
  Context source;
  std::vector<std::vector<PoolEntry>> map;
};

// Cartesian product of pool choices over the declared variables of ctx, in
// sort-major slot order with the first slot varying slowest. A closed ctx
// yields the single empty closing; an empty pool slot yields none.
std::vector<Closing> closings(const BindingSignature& sig, const SubstPool& pool,
                              const Context& ctx);

Term apply_closing(const BindingSignature& sig, const Term& t, const Closing& c);

enum class VerdictKind { Holds, Fails, Inconclusive };

const char* verdict_name(VerdictKind k);

// One frame on the path to a problem: at the pair (left, right) with depth
// rounds remaining, the transition of the challenging side under label to
// target went unmatched, pinned by closing when a pool substitution was in
// play. A null target records a fuel-exhausted challenge set instead.
struct Witness {
  Term left;
  Term right;
  bool from_left = true;
  int label = -1;
  Term target;
  std::optional<Closing> closing;
  int depth = 0;
};

// Trails run from the outermost pair to the innermost decision point.
// holds means "no violation within depth/fuel/pool bounds", never a proof.
struct Verdict {
  VerdictKind kind = VerdictKind::Holds;
  std::vector<Witness> trail;
};

// Bounded bisimulation checking. A definite fails needs the responder's
// transition set complete and every candidate refuted under some closing;
// anything weaker stays inconclusive. fails beats inconclusive overall.
class BisimSession {
 public:
  BisimSession(const DynamicSignature& dsig, SubstPool pool, int fuel);

  Verdict check(const Term& t1, const Term& t2, int depth);

  // Value-structural variant for rigidified signatures with value
  // operations: match the head value operation, relate actives as values,
  // relate passives under pool closings. Agrees with check() on such
  // signatures by construction.
  Verdict applicative(const Term& t1, const Term& t2, int depth);

  const DynamicSignature& dsig() const { return dsig_; }
  const SubstPool& pool() const { return pool_; }
  int fuel() const { return fuel_; }
  EvalSession& eval() { return eval_; }

 private:
  struct Key {
    Term a;
    Term b;
    int depth;

    bool operator==(const Key& o) const {
      return depth == o.depth && equal(a, o.a) && equal(b, o.b);
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(
          hash_combine(hash_combine(term_hash(k.a), term_hash(k.b)),
                       static_cast<std::uint64_t>(k.depth)));
    }
  };

  Verdict value_rel(const Term& v1, const Term& v2, int depth);

  const DynamicSignature& dsig_;
  SubstPool pool_;
  int fuel_;
  EvalSession eval_;
  std::unordered_map<Key, Verdict, KeyHash> memo_;
  std::unordered_map<Key, Verdict, KeyHash> app_memo_;
  std::unordered_map<Key, Verdict, KeyHash> val_memo_;
};

Verdict bounded_bisim(const DynamicSignature& dsig, const Term& t1, const Term& t2,
                      int depth, int fuel, const SubstPool& pool);
Verdict applicative_bisim(const DynamicSignature& dsig, const Term& t1, const Term& t2,
                          int depth, int fuel, const SubstPool& pool);

// Replays a verdict's trail: recorded challenges are real transitions,
// recorded closings apply, every frame's pair reproduces a non-holds
// verdict, and the outermost frame reproduces the verdict's kind.
bool recheck_witness(const DynamicSignature& dsig, const Verdict& v, int fuel,
                     const SubstPool& pool);

// Indexed family of duplicate-free term pairs; both components of a pair
// live at the block's sort and context.
struct RelationBlock {
  SortId sort = 0;
  Context ctx;
  std::vector<std::pair<Term, Term>> pairs;
};

struct Relation {
  std::vector<RelationBlock> blocks;
};

void relation_insert(Relation& r, SortId sort, const Context& ctx, Term a, Term b);
bool relation_contains(const Relation& r, SortId sort, const Context& ctx,
                       const Term& a, const Term& b);

// One problem found while checking a candidate relation: a challenge from
// one component of an instance pair that no transition of the other matches
// inside the relation, or a fuel-exhausted transition set (target null).
struct RelationIssue {
  bool definite = true;
  Term left;
  Term right;
  bool from_left = true;
  int label = -1;
  Term target;
  std::optional<Closing> closing;
  std::optional<std::pair<Term, Term>> escaped;
};

struct RelationReport {
  bool bisimulation = false;
  int definite_count = 0;
  int inconclusive_count = 0;
  std::vector<RelationIssue> issues;
};

// Matching condition over a finite candidate relation: every transition of
// either component matched by one of the other with all pool-closed target
// pairs again in the relation. Open blocks contribute their pool-closed
// instances, both as checked pairs and as membership targets.
RelationReport check_relation(const DynamicSignature& dsig, const Relation& r, int fuel,
                              const SubstPool& pool);

// Pool-bounded open extension: every pool closing of the pair must pass the
// closed-pair test, membership in r_closed when given, bounded_bisim at
// depth otherwise.
Verdict open_extension_check(const DynamicSignature& dsig, const Relation* r_closed,
                             const Term& e1, const Term& e2, const Context& ctx,
                             const SubstPool& pool, int depth, int fuel);

// { (t1, t2) in the closed universe of the sort | check = holds }.
Relation stratified_bisimilarity(const DynamicSignature& dsig, SortId sort, int max_size,
                                 int depth, int fuel, const SubstPool& pool);

}  // namespace opsem
