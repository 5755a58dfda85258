// Text formats: signature files with sorts/coerce/ops/labels/rules sections,
// term syntax with named binders, context specs, and relation files. The
// printer is canonical; parsing what it emits reproduces the input bytes.
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "opsem/bisim.hpp"

namespace opsem {

struct FileDiagnostic {
  int line = 0;  // 1-based
  int col = 0;   // 1-based
  std::string message;
};

// Thrown by the term, context, and relation parsers. what() carries the
// location prefix; `bare` is the message alone.
struct SigParseError : StructuralError {
  int line;
  int col;
  std::string bare;
  SigParseError(int line, int col, const std::string& msg);
};

struct SignatureParse {
  std::optional<DynamicSignature> dsig;
  std::vector<FileDiagnostic> diagnostics;  // nonempty iff parsing failed
};

// Builds the structures without running validate_signature, so rule sets in
// a rejected format still parse and the validator owns the verdict.
SignatureParse parse_signature(std::string_view text);
std::string print_signature(const DynamicSignature& dsig);

// Sort-directed: where the expected sort has an incoming coercion, terms of
// the sub sort are accepted and coerced in place, and coerce(T) spells the
// coercion out. Context and binder variables are named SORTNAME + index;
// metavariables (?k, ?k[args]) only parse inside rule lines.
Term parse_term(const BindingSignature& sig, std::string_view text, SortId sort,
                const Context& ctx);
std::string print_term(const BindingSignature& sig, const Term& t, const Context& ctx);

// "2" for single-sorted signatures, or "1 v + 0 p"; omitted sorts count 0.
Context parse_context_spec(const BindingSignature& sig, std::string_view text);
std::string print_context_spec(const BindingSignature& sig, const Context& ctx);

// Relation files: "pairs SORT@CTX" headers followed by "T ~ T" lines.
Relation parse_relation(const BindingSignature& sig, std::string_view text);
std::string print_relation(const BindingSignature& sig, const Relation& r);

}  // namespace opsem
