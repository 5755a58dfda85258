// Howe closure over finite term universes, transitive closure, and the
// property sweeps that probe congruence of the bounded bisimilarity checks.
#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "opsem/bisim.hpp"

namespace opsem {

// One enumerated carrier block: every term of the sort in the context up to
// max_size, in enumeration order.
struct UniverseBlock {
  SortId sort = 0;
  Context ctx;
  int max_size = 0;
  std::vector<Term> terms;
};

// Finite carrier for the closure fixpoint. Blocks cover every context with
// at most ctx_bound variables per sort at the full size bound, plus the
// binder-extended contexts reachable from operator arguments at one size
// less per step, so each term's immediate arguments sit in some block.
struct Universe {
  std::vector<UniverseBlock> blocks;

  const UniverseBlock* block(SortId sort, const Context& ctx) const;
  bool contains(SortId sort, const Context& ctx, const Term& t) const;
  std::size_t term_count() const;
};

Universe make_universe(const BindingSignature& sig, int max_size, int ctx_bound = 2);

// Decision procedure on open term pairs over one block. Must be reflexive;
// the closure inclusions additionally rely on symmetry and transitivity.
using BaseOracle = std::function<bool(SortId, const Context&, const Term&, const Term&)>;

BaseOracle equality_oracle();
// Pool-closed stratified bisimilarity: true when every pool closing of the
// pair holds at the depth. Memoised across queries through one session.
BaseOracle bisim_oracle(const DynamicSignature& dsig, SubstPool pool, int depth, int fuel);

struct FixpointStats {
  int iterations = 0;
  std::vector<std::size_t> sizes;  // total pairs after each pass
};

// Least relation on the universe closed under: x related to e whenever the
// oracle says so, and o(args) related to e whenever some o(args') in the
// block has componentwise-related arguments (under the binder-extended
// contexts) and the oracle relates o(args') to e. Coercion nodes behave as
// a unary operator.
Relation howe_closure(const DynamicSignature& dsig, const Universe& u, const BaseOracle& b,
                      FixpointStats* stats = nullptr);

// Pairs one more generating pass would add; 0 certifies the fixpoint.
int howe_step_additions(const DynamicSignature& dsig, const Universe& u, const BaseOracle& b,
                        const Relation& h);

struct CompositionIssue {
  SortId sort = 0;
  Context ctx;
  Term left;
  Term mid;
  Term right;
};

struct CompositionReport {
  bool ok = true;
  long checked = 0;
  std::vector<CompositionIssue> issues;
};

// Composition inclusion: h-related (a,b) and oracle-related (b,c) within a
// block force (a,c) into h.
CompositionReport composition_check(const DynamicSignature& dsig, const Universe& u,
                                    const Relation& h, const BaseOracle& b);

struct SubstitutionSample {
  SortId sort = 0;      // sort of the substituted pair
  Context ctx;          // context of the results
  SortId var_sort = 0;  // sort of the substituted variable
  Term e1, e1p;         // related pair with the variable free
  Term e2, e2p;         // related pair substituted for it
  Term r1, r2;          // the substitution results
};

struct SubstitutionReport {
  bool ok = true;
  int samples = 0;
  int applied = 0;
  int skipped = 0;  // results outside the universe
  std::vector<SubstitutionSample> violations;
};

// Samples h-related pairs and substitutes the last declared variable of a
// sort by another h-related pair at the reduced context; the results must be
// h-related again whenever they stay inside the universe.
SubstitutionReport hetero_substitution_check(const DynamicSignature& dsig, const Universe& u,
                                             const Relation& h, int n_samples,
                                             std::uint64_t seed);

// Pairwise composition until saturation.
Relation transitive_closure(const Relation& r);
// Union of the iterated compositions r, r;r, r;r;r, ... until stable. On
// finite relations this coincides with transitive_closure.
Relation relational_transitive_closure(const Relation& r);

struct SymmetryReport {
  bool ok = true;
  SortId sort = 0;  // first missing flipped pair, when !ok
  Context ctx;
  Term left;
  Term right;
};

SymmetryReport symmetry_check(const Relation& r);

struct SimulationReport {
  bool ok = true;  // no definite violation
  int pairs = 0;
  int definite_count = 0;
  int inconclusive_count = 0;
  std::vector<RelationIssue> issues;
};

// One-direction matching over the closed blocks of h: every transition of
// the left component is matched by one of the right whose pool-closed target
// pairs are h-related again. Fuel exhaustion and targets outside the
// universe are inconclusive findings, not violations.
SimulationReport simulation_check(const DynamicSignature& dsig, const Universe& u,
                                  const Relation& h, int fuel, const SubstPool& pool);

// One-hole contexts: the signature extended with a fresh nullary hole
// operator at hole_sort, and every closed term of root_sort up to max_size
// with exactly one hole occurrence.
struct HoleContexts {
  BindingSignature extended;
  int hole_op = -1;
  SortId hole_sort = 0;
  SortId root_sort = 0;
  std::vector<Term> contexts;
};

HoleContexts one_hole_contexts(const BindingSignature& sig, SortId hole_sort, SortId root_sort,
                               int max_size);
// Replaces the hole by the closed filler, reindexing it under the binders
// in scope at the occurrence.
Term plug(const BindingSignature& sig, const HoleContexts& hc, const Term& context,
          const Term& filler);

struct CongruenceParams {
  int depth = 3;
  int fuel = 8;
  SubstPool pool;
  int n_samples = 200;
  std::uint64_t seed = 0;
  int max_size = 5;   // closed pair universe bound
  int hole_size = 5;  // context size bound, hole included
  int check_depth = -1;  // plugged-pair depth; negative means depth - 1
};

struct CongruenceCase {
  Term left;
  Term right;
  std::string context;  // rendered against the hole-extended signature
  Term plugged_left;
  Term plugged_right;
  VerdictKind after = VerdictKind::Holds;
};

struct CongruenceReport {
  bool ok = true;
  int pair_population = 0;     // holds-related closed pairs at depth
  int context_population = 0;  // one-hole contexts sampled from
  int samples = 0;
  int holds = 0;
  int inconclusive = 0;
  std::vector<CongruenceCase> counterexamples;
};

// Samples bounded-bisimilar closed pairs and one-hole contexts, plugs, and
// rechecks at check_depth; counterexamples are definite failures only.
CongruenceReport congruence_sweep(const DynamicSignature& dsig, const CongruenceParams& p);

// JSON renderings of the sweep reports (terms in the text format).
std::string json_report(const DynamicSignature& dsig, const FixpointStats& stats);
std::string json_report(const DynamicSignature& dsig, const CompositionReport& rep);
std::string json_report(const DynamicSignature& dsig, const SubstitutionReport& rep);
std::string json_report(const DynamicSignature& dsig, const SymmetryReport& rep);
std::string json_report(const DynamicSignature& dsig, const SimulationReport& rep);
std::string json_report(const DynamicSignature& dsig, const CongruenceReport& rep);

}  // namespace opsem
