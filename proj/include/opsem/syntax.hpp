// Multi-sorted scoped terms over a binding signature: contexts, operators
// with binding arities, metavariables, coercions, substitution, enumeration.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace opsem {

// Thrown on ill-sorted or out-of-context inputs. Never swallowed.
struct StructuralError : std::runtime_error {
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

using SortId = int;

// A declared coercion sub -> super. In counterpart flavor every super-sorted
// variable supply also exposes the sub-sorted variables (their counterparts)
// as the first indices; in plain flavor the coercion is an explicit wrapper
// node and the sorts keep disjoint variable supplies.
struct Coercion {
  SortId sub = -1;
  SortId super = -1;
  bool counterpart = false;
};

struct SortTable {
  std::vector<std::string> names;
  std::vector<Coercion> coercions;

  int size() const { return static_cast<int>(names.size()); }
  const std::string& name(SortId s) const { return names.at(s); }
  std::optional<SortId> id(std::string_view n) const;
  // At most one coercion out of / into any sort; checked by make().
  const Coercion* from(SortId sub) const;
  const Coercion* into(SortId super) const;

  static SortTable make(std::vector<std::string> names, std::vector<Coercion> coercions);
};

// Per-sort variable counts. Indices are 1-based and per sort; extension
// appends new variables after the existing ones, so weakening into an
// extended context never renumbers old variables of the same block.
struct Context {
  std::vector<int> counts;

  bool closed() const;
  bool operator==(const Context&) const = default;
};

struct ArgSpec {
  SortId sort = -1;
  Context binds;  // variables the argument binds

  bool operator==(const ArgSpec&) const = default;
};

enum class OpKind { Plain, Value, Program };

struct Operator {
  std::string name;
  SortId result = -1;
  std::vector<ArgSpec> args;
  OpKind kind = OpKind::Plain;
  int actives = 0;  // OpKind::Value: leading argument count evaluated eagerly

  int passives() const { return static_cast<int>(args.size()) - actives; }
};

struct BindingSignature {
  SortTable sorts;
  std::optional<SortId> binding_sort;  // Value/Program argument binding sort
  std::vector<Operator> ops;

  std::optional<int> op_id(std::string_view name) const;
  const Operator& op(int id) const { return ops.at(id); }

  Context empty_context() const { return Context{std::vector<int>(sorts.size(), 0)}; }
  Context context(std::initializer_list<std::pair<SortId, int>> entries) const;
  Context extend(const Context& c, const Context& binds) const;
  // Number of variable indices available at sort s (counterpart flavor adds
  // the sub-sort count in front of s's own block).
  int supply(const Context& c, SortId s) const;

  // Argument specs of op `id` used at result annotation `ann`: for a Value
  // operator at the super sort, active arguments are carried at the super
  // sort (their payloads got coerced); everything else is as declared.
  std::vector<ArgSpec> arg_specs_at(int id, SortId ann) const;

  void check() const;  // operator well-formedness; throws StructuralError
};

// A metavariable: named hole with a parameter context. Occurrences carry an
// explicit argument list (one term per parameter, in sort-then-index order),
// so instantiation is plain substitution.
struct MetaVar {
  std::string name;
  Context params;
  SortId sort = -1;

  bool operator==(const MetaVar&) const = default;
};

enum class Tag { Var, Meta, Op, Coerce };

class TermNode;
using Term = std::shared_ptr<const TermNode>;

class TermNode {
 public:
  Tag tag;
  SortId sort;                  // sort of the whole term; for Op the annotation
  int index = 0;                // Var: 1-based index; Op: operator id
  std::optional<MetaVar> mv;    // Meta only
  std::vector<Term> args;       // Meta arguments / Op arguments / Coerce inner
  std::uint64_t hash = 0;
  int size = 0;                 // node count, Var and Coerce included

  TermNode(Tag t, SortId s, int i, std::optional<MetaVar> m, std::vector<Term> a);
};

// Constructors. Structural checks (arity, argument sorts) happen here;
// variable bounds are a context property checked by well_formed at API
// boundaries and preserved by the operations below.
Term var_(SortId sort, int index);
Term meta_(MetaVar mv, std::vector<Term> args);
Term op_(const BindingSignature& sig, int op, SortId ann, std::vector<Term> args);
// Normalising coercion at the term's sort; see flavor notes on Coercion.
Term coerce_(const BindingSignature& sig, const Term& t);

bool equal(const Term& a, const Term& b);
int compare(const Term& a, const Term& b);  // total order: size, then structure
std::uint64_t term_hash(const Term& t);

struct TermHash {
  std::size_t operator()(const Term& t) const { return static_cast<std::size_t>(t->hash); }
};
struct TermEq {
  bool operator()(const Term& a, const Term& b) const { return equal(a, b); }
};

void well_formed(const BindingSignature& sig, const Term& t, const Context& ctx,
                 SortId expected);

// Simultaneous substitution source -> target. map[s] lists the images of the
// declared variables of sort s (counterpart indices resolve through the
// sub-sort images, coerced on lookup).
struct Substitution {
  Context source;
  Context target;
  std::vector<std::vector<Term>> map;
};

Substitution identity_subst(const BindingSignature& sig, const Context& ctx);
// sigma^ : source+binds -> target+binds, identity on the fresh block.
Substitution up(const BindingSignature& sig, const Substitution& s, const Context& binds);
Term substitute(const BindingSignature& sig, const Term& t, const Substitution& s);
// Variable-for-variable renaming that inserts `binds` between `from` and the
// `inner` binder block: from+inner -> from+binds+inner.
Term weaken(const BindingSignature& sig, const Term& t, const Context& from,
            const Context& binds, const Context& inner);
// rename = substitute restricted to variable images; checked.
Term rename(const BindingSignature& sig, const Term& t, const Substitution& s);

// Metavariable environment: each entry is a term in the metavariable's own
// parameter context. instantiate() replaces every Meta node by its entry
// with parameters substituted by the (recursively instantiated) arguments;
// `ambient` is the context of t and of the result.
struct MetaEnv {
  std::vector<std::pair<std::string, Term>> entries;

  const Term* find(std::string_view name) const;
  void set(const std::string& name, Term t);
};

Term instantiate(const BindingSignature& sig, const Term& t, const MetaEnv& env,
                 const Context& ambient);

// All well-formed metavariable-free terms of the sort in the context with
// size <= max_size, deterministically ordered: by size, then variables by
// index, then operator-headed terms in declaration order (argument tuples
// lexicographic), then plain-flavor coercion-headed terms.
std::vector<Term> enumerate_terms(const BindingSignature& sig, SortId sort,
                                  const Context& ctx, int max_size);

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v);
std::uint64_t context_hash(const Context& c);

}  // namespace opsem
