// Fuel-bounded derivation search over a validated dynamic signature: labelled
// transition sets with completeness flags, re-checkable derivation traces, and
// the small-step reachability oracle for the nondeterministic instance.
#pragma once

#include <unordered_map>

#include "opsem/rules.hpp"

namespace opsem {

struct TransitionSet {
  std::vector<Term> targets;  // first-found order, structurally deduplicated
  // false means the set is fuel-independent: no larger fuel adds targets
  bool fuel_exhausted = false;
};

struct Derivation {
  int rule = -1;  // index into dsig.expanded
  Term source;
  int label = -1;
  Term target;
  std::vector<Derivation> premises;
};

// Shared memo across calls. Fuel is part of the key, so cached entries are
// exact regardless of the order queries arrive in.
class EvalSession {
 public:
  explicit EvalSession(const DynamicSignature& dsig);

  // Targets derivable from t with derivation height <= fuel.
  TransitionSet transitions(const Term& t, int label, int fuel);
  std::vector<Derivation> derivation_trace(const Term& t, int label, int fuel);

  const DynamicSignature& dsig() const { return dsig_; }

 private:
  struct Key {
    Term term;
    int label;
    int fuel;
    bool operator==(const Key& o) const {
      return label == o.label && fuel == o.fuel && equal(term, o.term);
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(
          hash_combine(hash_combine(k.term->hash, static_cast<std::uint64_t>(k.label)),
                       static_cast<std::uint64_t>(k.fuel)));
    }
  };

  const DynamicSignature& dsig_;
  std::unordered_map<Key, TransitionSet, KeyHash> memo_;
  std::unordered_map<Key, std::vector<Derivation>, KeyHash> trace_memo_;

  std::vector<int> candidates(const Term& t, int label) const;
  bool bind_head(const Term& t, int rule_idx, MetaEnv& env) const;
};

// One-shot wrappers with a fresh memo; check the term against the label's
// source sort and context first.
TransitionSet transitions(const DynamicSignature& dsig, const Term& t, int label, int fuel);
std::vector<Derivation> derivation_trace(const DynamicSignature& dsig, const Term& t, int label,
                                         int fuel);

// Re-verifies a derivation tree bottom-up against the signature's rules.
bool check_derivation(const DynamicSignature& dsig, const Derivation& d);

struct OracleResult {
  std::vector<Term> reachable;  // includes the start term (reflexivity)
  bool complete = false;        // closure stabilised within the bound
};

// Weighted reachability for the lam/app/amb instance: beta and choice steps
// cost 1, each left-application congruence wrapper adds 1, transitivity sums.
OracleResult small_step_oracle(const DynamicSignature& dsig, const Term& t, int bound);

// The diverging representative (lam x. x x)(lam x. x x) over a signature
// with lam/app operators.
Term omega(const BindingSignature& sig);

}  // namespace opsem
