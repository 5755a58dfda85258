// Labelled dynamic signatures: rigid rules, schematic (wildcard-head) rules,
// Howe-style classical rules, the rule-format validator, schematic expansion,
// canonical value-operation rules, and the rigidification compiler.
#pragma once

#include <map>
#include <tuple>

#include "opsem/syntax.hpp"

namespace opsem {

struct Label {
  std::string name;
  SortId src_sort = -1;
  Context src_ctx;
  SortId tgt_sort = -1;
  Context tgt_ctx;
};

// A named validation finding. `code` is stable and machine-checkable;
// `message` is the human rendering. rule/premise locate the finding.
struct Diagnostic {
  std::string code;
  std::string message;
  std::string rule;
  int premise = 0;  // 1-based; 0 = not premise-specific
};

// Premise target is stored as a general term so ill-formatted rules can be
// represented and then rejected; validated rigid rules always carry a bare
// fresh metavariable there (accessor: premise_fresh).
struct RulePremise {
  Term source;
  int label = -1;
  Term target;
};

// One shape for rigid, schematic and Howe rules; which invariants apply
// depends on the section a rule is declared in. `source` is the conclusion
// source pattern, `target` the conclusion target term.
struct Rule {
  std::string name;
  int label = -1;
  Term source;
  std::vector<RulePremise> premises;
  Term target;
};

struct HeadInfo {
  int op = -1;
  SortId ann = -1;
  bool coerced = false;  // source pattern sits under one declared coercion
};

struct DynamicSignature {
  BindingSignature sig;
  std::vector<Label> labels;
  std::vector<Rule> rules;      // rigid section, as declared
  std::vector<Rule> schematic;  // wildcard-head section
  std::vector<Rule> howe;       // classical Howe section

  // Populated by validate_signature on success.
  bool validated = false;
  std::vector<Rule> expanded;  // rules ++ expand_schematic(schematic)
  std::vector<HeadInfo> expanded_heads;
  std::map<std::tuple<int, SortId, int>, std::vector<int>> dispatch;

  std::optional<int> label_id(std::string_view name) const;
  const Label& label(int id) const { return labels.at(id); }
};

struct ValidationReport {
  bool ok = false;
  std::vector<Diagnostic> diagnostics;
  // (head operator with annotation, label name) -> rule names, over the
  // post-expansion rule set
  std::vector<std::tuple<std::string, std::string, std::vector<std::string>>> table;
};

// The cellularity finding: premise target is not a bare fresh metavariable.
inline constexpr const char* kNonMetavariableTarget = "non-metavariable-target-pattern";

std::vector<Diagnostic> validate_rigid(const DynamicSignature& dsig, const Rule& rule);
std::vector<Diagnostic> validate_schematic(const DynamicSignature& dsig, const Rule& rule);
std::vector<Diagnostic> validate_howe(const DynamicSignature& dsig, const Rule& rule);

// Validates everything, expands schematic rules and builds the dispatch
// index. On any diagnostic the signature is left unvalidated.
ValidationReport validate_signature(DynamicSignature& dsig);

// One rigid rule per constructor form of the conclusion label's source sort.
// Requires a validated-shape schematic rule over closed contexts.
std::vector<Rule> expand_schematic(const DynamicSignature& dsig, const Rule& rule);

// Head operator of a validated rigid rule's conclusion source.
HeadInfo head_of(const BindingSignature& sig, const Rule& rule);
// The bare fresh metavariable of a validated premise.
MetaVar premise_fresh(const RulePremise& p);

// Is t a metavariable applied to exactly the trailing |params| variables of
// the ambient context (the generic/identity argument list)?
bool is_generic_meta(const BindingSignature& sig, const Term& t, const Context& ambient);
// That identity argument list itself.
std::vector<Term> generic_args(const BindingSignature& sig, const Context& params,
                               const Context& ambient);

// Label set of the rigidified system: the declared evaluation label, then
// per value operation its active and passive extraction labels.
std::vector<Label> howe_label_set(const BindingSignature& sig);
// Canonical rules per value operation: one evaluation rule plus one
// extraction axiom per active and per passive argument.
std::vector<Rule> canonical_rules(const BindingSignature& sig,
                                  const std::vector<Label>& labels);

struct RigidifyResult {
  DynamicSignature dsig;
  // (origin, generated rule name); origin is the Howe rule's name or
  // "op:<name>" for canonical rules
  std::vector<std::pair<std::string, std::string>> mapping;
};

// Compiles every Howe rule to a rigid premise chain (evaluation first, then
// active extractions in index order, then passive extractions in index
// order), appends the canonical rules, and returns the validated result.
RigidifyResult rigidify(const DynamicSignature& dsig);

}  // namespace opsem
