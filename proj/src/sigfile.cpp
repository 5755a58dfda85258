#include "opsem/sigfile.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace opsem {

namespace {

int supply_index(const BindingSignature& sig, const Context& c, SortId s, int declared) {
  const Coercion* into = sig.sorts.into(s);
  if (into && into->counterpart) return c.counts[into->sub] + declared;
  return declared;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

struct Token {
  enum Kind { Ident, Number, Punct, Arrow, PremiseArrow, End } kind = End;
  std::string text;  // Ident/Number/Punct lexeme; PremiseArrow: the label name
  int line = 0;
  int col = 0;
};

// One directive per line; '#' starts a comment; '-' continues an identifier
// only when followed by an identifier character, so "lam-val" is one token
// while "->" and "d-=(...)" split.
std::vector<Token> lex_line(const std::string& s, int line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    int col = static_cast<int>(i) + 1;
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() &&
             (ident_char(s[j]) || (s[j] == '-' && j + 1 < s.size() && ident_char(s[j + 1]))))
        ++j;
      out.push_back({Token::Ident, s.substr(i, j - i), line, col});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Token::Number, s.substr(i, j - i), line, col});
      i = j;
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      out.push_back({Token::Arrow, "->", line, col});
      i += 2;
      continue;
    }
    if (c == '=') {
      std::size_t j = i + 1;
      while (j < s.size() &&
             (ident_char(s[j]) || (s[j] == '-' && j + 1 < s.size() && ident_char(s[j + 1]))))
        ++j;
      if (j > i + 1 && j + 1 < s.size() && s[j] == '=' && s[j + 1] == '>') {
        out.push_back({Token::PremiseArrow, s.substr(i + 1, j - i - 1), line, col});
        i = j + 2;
        continue;
      }
      out.push_back({Token::Punct, "=", line, col});
      ++i;
      continue;
    }
    if (std::string("()[],.:@~+?-").find(c) != std::string::npos) {
      out.push_back({Token::Punct, std::string(1, c), line, col});
      ++i;
      continue;
    }
    throw SigParseError(line, col, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Token::End, "", line, static_cast<int>(s.size()) + 1});
  return out;
}

struct Cur {
  std::vector<Token> toks;
  std::size_t i = 0;

  const Token& peek(std::size_t k = 0) const {
    std::size_t j = i + k;
    return j < toks.size() ? toks[j] : toks.back();
  }
  const Token& next() { return toks[i < toks.size() - 1 ? i++ : i]; }
  bool at_end() const { return peek().kind == Token::End; }
  bool is_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Token::Punct && peek(k).text == p;
  }
  bool is_ident(std::string_view w, std::size_t k = 0) const {
    return peek(k).kind == Token::Ident && peek(k).text == w;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw SigParseError(t.line, t.col, msg);
  }
  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    ++i;
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Token::Ident) fail(std::string("expected ") + what);
    return next().text;
  }
  int expect_number(const char* what) {
    if (peek().kind != Token::Number) fail(std::string("expected ") + what);
    return std::stoi(next().text);
  }
};

SortId expect_sort(Cur& cur, const BindingSignature& sig) {
  const Token& t = cur.peek();
  std::string name = cur.expect_ident("a sort name");
  std::optional<SortId> s = sig.sorts.id(name);
  if (!s) throw SigParseError(t.line, t.col, "unknown sort " + name);
  return *s;
}

// CTX tokens: a bare number (single-sorted) or "m v + n p" with each sort at
// most once; omitted sorts count 0.
Context parse_ctx_tokens(Cur& cur, const BindingSignature& sig) {
  Context c = sig.empty_context();
  if (cur.peek().kind == Token::Number && cur.peek(1).kind != Token::Ident) {
    if (sig.sorts.size() != 1) cur.fail("a bare context count needs a single-sorted signature");
    c.counts[0] = cur.expect_number("a variable count");
    return c;
  }
  std::vector<bool> seen(c.counts.size(), false);
  for (;;) {
    int n = cur.expect_number("a variable count");
    SortId s = expect_sort(cur, sig);
    if (seen[s]) cur.fail("sort listed twice in a context");
    seen[s] = true;
    c.counts[s] = n;
    if (!cur.is_punct("+")) break;
    cur.next();
  }
  return c;
}

Context parse_ctx_at(Cur& cur, const BindingSignature& sig) {
  if (cur.is_punct("(")) {
    cur.next();
    Context c = parse_ctx_tokens(cur, sig);
    cur.expect_punct(")");
    return c;
  }
  if (sig.sorts.size() != 1) cur.fail("multi-sorted contexts need parentheses");
  Context c = sig.empty_context();
  c.counts[0] = cur.expect_number("a variable count");
  return c;
}

struct NameEnv {
  // name -> (sort, declared index), innermost last
  std::vector<std::pair<std::string, std::pair<SortId, int>>> entries;

  void seed(const BindingSignature& sig, const Context& ctx) {
    for (SortId s = 0; s < sig.sorts.size(); ++s)
      for (int j = 1; j <= ctx.counts[s]; ++j)
        entries.emplace_back(sig.sorts.name(s) + std::to_string(j), std::make_pair(s, j));
  }
  const std::pair<SortId, int>* find(std::string_view n) const {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      if (it->first == n) return &it->second;
    return nullptr;
  }
};

struct MetaScope {
  bool allowed = false;
  std::map<std::string, MetaVar> mvs;
};

Term parse_term_at(Cur& cur, const BindingSignature& sig, SortId expect, const Context& ctx,
                   NameEnv& names, MetaScope& metas);

// [IDENT (, IDENT)* .] lookahead for binder name lists.
bool peek_binders(const Cur& cur) {
  std::size_t k = 0;
  if (cur.peek(k).kind != Token::Ident) return false;
  ++k;
  while (cur.is_punct(",", k) && cur.peek(k + 1).kind == Token::Ident) k += 2;
  return cur.is_punct(".", k);
}

std::vector<Term> parse_op_args(Cur& cur, const BindingSignature& sig,
                                const std::vector<ArgSpec>& specs, const Context& ctx,
                                NameEnv& names, MetaScope& metas) {
  std::vector<Term> args;
  if (specs.empty()) {
    if (cur.is_punct("(") && cur.is_punct(")", 1)) {
      cur.next();
      cur.next();
    }
    return args;
  }
  cur.expect_punct("(");
  for (std::size_t a = 0; a < specs.size(); ++a) {
    if (a > 0) cur.expect_punct(",");
    const ArgSpec& spec = specs[a];
    int binder_total = 0;
    for (int n : spec.binds.counts) binder_total += n;
    if (binder_total > 0) {
      if (!peek_binders(cur)) cur.fail("expected binder names followed by '.'");
      std::vector<std::string> binder_names;
      binder_names.push_back(cur.expect_ident("a binder name"));
      while (cur.is_punct(",")) {
        cur.next();
        binder_names.push_back(cur.expect_ident("a binder name"));
      }
      cur.expect_punct(".");
      if (static_cast<int>(binder_names.size()) != binder_total)
        cur.fail("binder name count does not match the argument's binding arity");
      std::size_t used = names.entries.size();
      std::size_t bi = 0;
      for (SortId s = 0; s < sig.sorts.size(); ++s)
        for (int j = 1; j <= spec.binds.counts[s]; ++j)
          names.entries.emplace_back(binder_names[bi++],
                                     std::make_pair(s, ctx.counts[s] + j));
      args.push_back(
          parse_term_at(cur, sig, spec.sort, sig.extend(ctx, spec.binds), names, metas));
      names.entries.resize(used);
    } else {
      args.push_back(parse_term_at(cur, sig, spec.sort, ctx, names, metas));
    }
  }
  cur.expect_punct(")");
  return args;
}

Term parse_term_at(Cur& cur, const BindingSignature& sig, SortId expect, const Context& ctx,
                   NameEnv& names, MetaScope& metas) {
  const Token& t = cur.peek();
  if (cur.is_punct("?")) {
    if (!metas.allowed) cur.fail("metavariables only appear inside rules");
    cur.next();
    std::string name = cur.expect_ident("a metavariable name");
    auto known = metas.mvs.find(name);
    if (cur.is_punct("[")) {
      cur.next();
      if (known == metas.mvs.end())
        throw SigParseError(t.line, t.col,
                            "metavariable ?" + name + " needs a declaring occurrence first");
      const MetaVar& mv = known->second;
      std::vector<Term> args;
      bool first = true;
      for (SortId s = 0; s < sig.sorts.size(); ++s)
        for (int j = 0; j < mv.params.counts[s]; ++j) {
          if (!first) cur.expect_punct(",");
          first = false;
          args.push_back(parse_term_at(cur, sig, s, ctx, names, metas));
        }
      cur.expect_punct("]");
      if (mv.sort != expect)
        throw SigParseError(t.line, t.col, "metavariable ?" + name + " used at two sorts");
      return meta_(mv, std::move(args));
    }
    if (known != metas.mvs.end()) {
      const MetaVar& mv = known->second;
      if (mv.sort != expect)
        throw SigParseError(t.line, t.col, "metavariable ?" + name + " used at two sorts");
      for (SortId s = 0; s < sig.sorts.size(); ++s)
        if (mv.params.counts[s] > ctx.counts[s])
          throw SigParseError(t.line, t.col,
                              "metavariable ?" + name + " needs explicit arguments here");
      return meta_(mv, generic_args(sig, mv.params, ctx));
    }
    MetaVar mv{name, ctx, expect};
    metas.mvs.emplace(name, mv);
    return meta_(mv, generic_args(sig, ctx, ctx));
  }
  if (cur.is_ident("coerce") && cur.is_punct("(", 1)) {
    const Coercion* co = sig.sorts.into(expect);
    if (!co)
      throw SigParseError(t.line, t.col,
                          "no coercion into sort " + sig.sorts.name(expect));
    cur.next();
    cur.next();
    Term inner = parse_term_at(cur, sig, co->sub, ctx, names, metas);
    cur.expect_punct(")");
    return coerce_(sig, inner);
  }
  if (cur.peek().kind != Token::Ident) cur.fail("expected a term");
  std::string name = cur.next().text;
  if (const auto* bound = names.find(name)) {
    auto [s, declared] = *bound;
    Term v = var_(s, supply_index(sig, ctx, s, declared));
    if (s == expect) return v;
    const Coercion* co = sig.sorts.into(expect);
    if (co && co->sub == s) return coerce_(sig, v);
    throw SigParseError(t.line, t.col,
                        "variable " + name + " has sort " + sig.sorts.name(s) + ", expected " +
                            sig.sorts.name(expect));
  }
  std::optional<int> op = sig.op_id(name);
  if (!op) throw SigParseError(t.line, t.col, "unknown name " + name);
  SortId r = sig.op(*op).result;
  if (r == expect) {
    std::vector<ArgSpec> specs = sig.arg_specs_at(*op, r);
    return op_(sig, *op, r, parse_op_args(cur, sig, specs, ctx, names, metas));
  }
  const Coercion* co = sig.sorts.into(expect);
  if (!co || co->sub != r)
    throw SigParseError(t.line, t.col,
                        "operator " + name + " builds sort " + sig.sorts.name(r) +
                            ", expected " + sig.sorts.name(expect));
  if (co->counterpart) {
    std::vector<ArgSpec> specs = sig.arg_specs_at(*op, expect);
    return op_(sig, *op, expect, parse_op_args(cur, sig, specs, ctx, names, metas));
  }
  std::vector<ArgSpec> specs = sig.arg_specs_at(*op, r);
  return coerce_(sig, op_(sig, *op, r, parse_op_args(cur, sig, specs, ctx, names, metas)));
}

Term parse_whole_term(Cur& cur, const BindingSignature& sig, SortId sort, const Context& ctx,
                      MetaScope& metas) {
  NameEnv names;
  names.seed(sig, ctx);
  return parse_term_at(cur, sig, sort, ctx, names, metas);
}

// ---- printing ----

void print_ctx_spec(std::ostream& os, const BindingSignature& sig, const Context& ctx) {
  if (sig.sorts.size() == 1) {
    os << ctx.counts[0];
    return;
  }
  for (SortId s = 0; s < sig.sorts.size(); ++s) {
    if (s > 0) os << " + ";
    os << ctx.counts[s] << ' ' << sig.sorts.name(s);
  }
}

void print_ctx_at(std::ostream& os, const BindingSignature& sig, const Context& ctx) {
  if (sig.sorts.size() == 1) {
    os << ctx.counts[0];
    return;
  }
  os << '(';
  print_ctx_spec(os, sig, ctx);
  os << ')';
}

void print_term_rec(std::ostream& os, const BindingSignature& sig, const Term& t,
                    const Context& ctx) {
  switch (t->tag) {
    case Tag::Var: {
      const Coercion* co = sig.sorts.into(t->sort);
      if (co && co->counterpart && t->index <= ctx.counts[co->sub]) {
        os << "coerce(" << sig.sorts.name(co->sub) << t->index << ')';
        return;
      }
      int declared = t->index;
      if (co && co->counterpart) declared -= ctx.counts[co->sub];
      os << sig.sorts.name(t->sort) << declared;
      return;
    }
    case Tag::Coerce:
      os << "coerce(";
      print_term_rec(os, sig, t->args[0], ctx);
      os << ')';
      return;
    case Tag::Meta: {
      if (is_generic_meta(sig, t, ctx)) {
        os << '?' << t->mv->name;
        return;
      }
      os << '?' << t->mv->name << '[';
      for (std::size_t k = 0; k < t->args.size(); ++k) {
        if (k > 0) os << ", ";
        print_term_rec(os, sig, t->args[k], ctx);
      }
      os << ']';
      return;
    }
    case Tag::Op: {
      os << sig.op(t->index).name;
      std::vector<ArgSpec> specs = sig.arg_specs_at(t->index, t->sort);
      if (specs.empty()) return;
      os << '(';
      for (std::size_t a = 0; a < specs.size(); ++a) {
        if (a > 0) os << ", ";
        const ArgSpec& spec = specs[a];
        bool any = false;
        bool first = true;
        for (SortId s = 0; s < sig.sorts.size(); ++s)
          for (int j = 1; j <= spec.binds.counts[s]; ++j) {
            os << (first ? "" : ", ") << sig.sorts.name(s) << (ctx.counts[s] + j);
            first = false;
            any = true;
          }
        if (any) os << ". ";
        print_term_rec(os, sig, t->args[a], any ? sig.extend(ctx, spec.binds) : ctx);
      }
      os << ')';
      return;
    }
  }
}

// ---- signature parsing ----

struct SigBuilder {
  std::vector<std::string> sort_names;
  std::vector<Coercion> coercions;
  std::optional<SortId> binding;
  DynamicSignature d;
  int stage = 0;  // 0 sorts/coerce, 1 ops, 2 labels, 3 rules
  bool table_built = false;
  bool checked = false;

  std::optional<SortId> sort_of(const std::string& n) const {
    for (std::size_t i = 0; i < sort_names.size(); ++i)
      if (sort_names[i] == n) return static_cast<SortId>(i);
    return std::nullopt;
  }
  void advance(Cur& cur, int want) {
    if (want < stage) cur.fail("sections must appear in order: sorts, ops, labels, rules");
    if (want >= 1 && !table_built) {
      d.sig.sorts = SortTable::make(sort_names, coercions);
      d.sig.binding_sort = binding;
      table_built = true;
    }
    if (want >= 2 && !checked) {
      d.sig.check();
      checked = true;
    }
    stage = want;
  }
};

void parse_op_line(Cur& cur, SigBuilder& b) {
  Operator op;
  op.name = cur.expect_ident("an operator name");
  if (b.d.sig.op_id(op.name)) cur.fail("operator " + op.name + " is already declared");
  cur.expect_punct(":");
  cur.expect_punct("(");
  if (!cur.is_punct(")")) {
    for (;;) {
      ArgSpec spec;
      spec.sort = expect_sort(cur, b.d.sig);
      spec.binds = b.d.sig.empty_context();
      if (cur.is_punct("[")) {
        cur.next();
        spec.binds = parse_ctx_tokens(cur, b.d.sig);
        cur.expect_punct("]");
      }
      op.args.push_back(std::move(spec));
      if (!cur.is_punct(",")) break;
      cur.next();
    }
  }
  cur.expect_punct(")");
  if (cur.peek().kind != Token::Arrow) cur.fail("expected '->'");
  cur.next();
  op.result = expect_sort(cur, b.d.sig);
  if (cur.is_ident("program")) {
    cur.next();
    op.kind = OpKind::Program;
  } else if (cur.is_ident("value")) {
    cur.next();
    op.kind = OpKind::Value;
    op.actives = cur.expect_number("the active argument count");
    int npassive = cur.expect_number("the passive argument count");
    if (op.actives + npassive != static_cast<int>(op.args.size()))
      cur.fail("active + passive counts must equal the argument count");
    if (!cur.is_ident("d")) cur.fail("expected d-=( ... )");
    cur.next();
    cur.expect_punct("-");
    cur.expect_punct("=");
    cur.expect_punct("(");
    std::vector<int> depths;
    if (!cur.is_punct(")")) {
      for (;;) {
        depths.push_back(cur.expect_number("a binding depth"));
        if (!cur.is_punct(",")) break;
        cur.next();
      }
    }
    cur.expect_punct(")");
    if (static_cast<int>(depths.size()) != npassive)
      cur.fail("d-=(...) must list one depth per passive argument");
    if (!b.binding) cur.fail("value operators need a binding sort declaration");
    for (int k = 0; k < npassive; ++k)
      if (op.args[op.actives + k].binds.counts[*b.binding] != depths[k])
        cur.fail("d-=(...) disagrees with the argument's binding context");
  }
  b.d.sig.ops.push_back(std::move(op));
}

void parse_label_line(Cur& cur, SigBuilder& b) {
  Label lab;
  lab.name = cur.expect_ident("a label name");
  if (b.d.label_id(lab.name)) cur.fail("label " + lab.name + " is already declared");
  cur.expect_punct(":");
  lab.src_sort = expect_sort(cur, b.d.sig);
  cur.expect_punct("@");
  lab.src_ctx = parse_ctx_at(cur, b.d.sig);
  if (cur.peek().kind != Token::Arrow) cur.fail("expected '->'");
  cur.next();
  lab.tgt_sort = expect_sort(cur, b.d.sig);
  cur.expect_punct("@");
  lab.tgt_ctx = parse_ctx_at(cur, b.d.sig);
  b.d.labels.push_back(std::move(lab));
}

int expect_label(const SigBuilder& b, const std::string& name, const Token& at) {
  std::optional<int> id = b.d.label_id(name);
  if (!id) throw SigParseError(at.line, at.col, "unknown label " + name);
  return *id;
}

Rule parse_rule_line(Cur& cur, SigBuilder& b) {
  Rule rule;
  rule.name = cur.expect_ident("a rule name");
  cur.expect_punct(":");

  std::size_t gives_at = cur.i;
  while (gives_at < cur.toks.size() && !(cur.toks[gives_at].kind == Token::Ident &&
                                         cur.toks[gives_at].text == "gives"))
    ++gives_at;
  if (gives_at + 1 >= cur.toks.size() || cur.toks[gives_at + 1].kind != Token::Ident)
    cur.fail("rule needs 'gives LABEL TERM'");
  rule.label = expect_label(b, cur.toks[gives_at + 1].text, cur.toks[gives_at + 1]);
  const Label& lab = b.d.labels[rule.label];

  MetaScope metas;
  metas.allowed = true;
  rule.source = parse_whole_term(cur, b.d.sig, lab.src_sort, lab.src_ctx, metas);
  if (cur.is_ident("with")) {
    cur.next();
    for (;;) {
      std::size_t arrow_at = cur.i;
      while (arrow_at < cur.toks.size() && cur.toks[arrow_at].kind != Token::PremiseArrow)
        ++arrow_at;
      if (arrow_at >= cur.toks.size()) cur.fail("premise needs '=LABEL=>'");
      int plabel = expect_label(b, cur.toks[arrow_at].text, cur.toks[arrow_at]);
      const Label& pl = b.d.labels[plabel];
      RulePremise pr;
      pr.label = plabel;
      pr.source = parse_whole_term(cur, b.d.sig, pl.src_sort, pl.src_ctx, metas);
      if (cur.peek().kind != Token::PremiseArrow) cur.fail("expected '=LABEL=>'");
      cur.next();
      pr.target = parse_whole_term(cur, b.d.sig, pl.tgt_sort, pl.tgt_ctx, metas);
      rule.premises.push_back(std::move(pr));
      if (!cur.is_punct(",")) break;
      cur.next();
    }
  }
  if (!cur.is_ident("gives")) cur.fail("expected 'gives'");
  cur.next();
  cur.expect_ident("the label name");
  rule.target = parse_whole_term(cur, b.d.sig, lab.tgt_sort, lab.tgt_ctx, metas);
  if (!cur.at_end()) cur.fail("trailing tokens after the rule");
  return rule;
}

}  // namespace

SigParseError::SigParseError(int line_, int col_, const std::string& msg)
    : StructuralError("line " + std::to_string(line_) + ", column " + std::to_string(col_) +
                      ": " + msg),
      line(line_),
      col(col_),
      bare(msg) {}

SignatureParse parse_signature(std::string_view text) {
  SignatureParse out;
  SigBuilder b;
  try {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      Cur cur{lex_line(line, lineno)};
      if (cur.at_end()) continue;
      std::string head = cur.expect_ident("a directive");
      if (head == "sort") {
        b.advance(cur, 0);
        std::string n = cur.expect_ident("a sort name");
        if (b.sort_of(n)) cur.fail("sort " + n + " is already declared");
        b.sort_names.push_back(n);
      } else if (head == "coerce") {
        b.advance(cur, 0);
        std::string sub = cur.expect_ident("a sort name");
        if (cur.peek().kind != Token::Arrow) cur.fail("expected '->'");
        cur.next();
        std::string super = cur.expect_ident("a sort name");
        Coercion co;
        auto si = b.sort_of(sub), pi = b.sort_of(super);
        if (!si || !pi) cur.fail("coercion mentions an undeclared sort");
        co.sub = *si;
        co.super = *pi;
        if (cur.is_ident("counterpart")) {
          cur.next();
          co.counterpart = true;
        }
        b.coercions.push_back(co);
      } else if (head == "binding") {
        b.advance(cur, 0);
        std::string n = cur.expect_ident("a sort name");
        auto s = b.sort_of(n);
        if (!s) cur.fail("unknown sort " + n);
        b.binding = *s;
      } else if (head == "op") {
        b.advance(cur, 1);
        parse_op_line(cur, b);
      } else if (head == "label") {
        b.advance(cur, 2);
        parse_label_line(cur, b);
      } else if (head == "rule") {
        b.advance(cur, 3);
        b.d.rules.push_back(parse_rule_line(cur, b));
      } else if (head == "schematic-rule") {
        b.advance(cur, 3);
        b.d.schematic.push_back(parse_rule_line(cur, b));
      } else if (head == "howe-rule") {
        b.advance(cur, 3);
        b.d.howe.push_back(parse_rule_line(cur, b));
      } else {
        cur.fail("unknown directive " + head);
      }
      if (head == "sort" || head == "coerce" || head == "binding")
        if (!cur.at_end()) cur.fail("trailing tokens");
    }
    Cur eof{std::vector<Token>{Token{Token::End, "", lineno + 1, 1}}};
    b.advance(eof, std::max(b.stage, 2));
    out.dsig = std::move(b.d);
  } catch (const SigParseError& e) {
    out.diagnostics.push_back({e.line, e.col, e.bare});
  } catch (const StructuralError& e) {
    out.diagnostics.push_back({0, 0, e.what()});
  }
  return out;
}

std::string print_signature(const DynamicSignature& dsig) {
  const BindingSignature& sig = dsig.sig;
  std::ostringstream os;
  std::vector<std::string> blocks;

  {
    std::ostringstream blk;
    for (SortId s = 0; s < sig.sorts.size(); ++s) blk << "sort " << sig.sorts.name(s) << '\n';
    blocks.push_back(blk.str());
  }
  if (!sig.sorts.coercions.empty() || sig.binding_sort) {
    std::ostringstream blk;
    for (const Coercion& co : sig.sorts.coercions)
      blk << "coerce " << sig.sorts.name(co.sub) << " -> " << sig.sorts.name(co.super)
          << (co.counterpart ? " counterpart" : "") << '\n';
    if (sig.binding_sort) blk << "binding " << sig.sorts.name(*sig.binding_sort) << '\n';
    blocks.push_back(blk.str());
  }
  {
    std::ostringstream blk;
    for (const Operator& op : sig.ops) {
      blk << "op " << op.name << " : (";
      for (std::size_t a = 0; a < op.args.size(); ++a) {
        if (a > 0) blk << ", ";
        blk << sig.sorts.name(op.args[a].sort);
        if (!op.args[a].binds.closed()) {
          blk << '[';
          print_ctx_spec(blk, sig, op.args[a].binds);
          blk << ']';
        }
      }
      blk << ") -> " << sig.sorts.name(op.result);
      if (op.kind == OpKind::Program) blk << " program";
      if (op.kind == OpKind::Value) {
        blk << " value " << op.actives << ' ' << op.passives() << " d-=(";
        for (int k = 0; k < op.passives(); ++k) {
          if (k > 0) blk << ", ";
          blk << op.args[op.actives + k].binds.counts[*sig.binding_sort];
        }
        blk << ')';
      }
      blk << '\n';
    }
    if (!sig.ops.empty()) blocks.push_back(blk.str());
  }
  {
    std::ostringstream blk;
    for (const Label& lab : dsig.labels) {
      blk << "label " << lab.name << " : " << sig.sorts.name(lab.src_sort) << '@';
      print_ctx_at(blk, sig, lab.src_ctx);
      blk << " -> " << sig.sorts.name(lab.tgt_sort) << '@';
      print_ctx_at(blk, sig, lab.tgt_ctx);
      blk << '\n';
    }
    if (!dsig.labels.empty()) blocks.push_back(blk.str());
  }
  auto rule_block = [&](const char* keyword, const std::vector<Rule>& rules) {
    if (rules.empty()) return;
    std::ostringstream blk;
    for (const Rule& r : rules) {
      const Label& lab = dsig.labels[r.label];
      blk << keyword << ' ' << r.name << ": ";
      print_term_rec(blk, sig, r.source, lab.src_ctx);
      for (std::size_t p = 0; p < r.premises.size(); ++p) {
        const Label& pl = dsig.labels[r.premises[p].label];
        blk << (p == 0 ? " with " : ", ");
        print_term_rec(blk, sig, r.premises[p].source, pl.src_ctx);
        blk << " =" << pl.name << "=> ";
        print_term_rec(blk, sig, r.premises[p].target, pl.tgt_ctx);
      }
      blk << " gives " << lab.name << ' ';
      print_term_rec(blk, sig, r.target, lab.tgt_ctx);
      blk << '\n';
    }
    blocks.push_back(blk.str());
  };
  rule_block("rule", dsig.rules);
  rule_block("schematic-rule", dsig.schematic);
  rule_block("howe-rule", dsig.howe);

  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i > 0) os << '\n';
    os << blocks[i];
  }
  return os.str();
}

Term parse_term(const BindingSignature& sig, std::string_view text, SortId sort,
                const Context& ctx) {
  Cur cur{lex_line(std::string(text), 1)};
  MetaScope metas;
  Term t = parse_whole_term(cur, sig, sort, ctx, metas);
  if (!cur.at_end()) cur.fail("trailing tokens after the term");
  well_formed(sig, t, ctx, sort);
  return t;
}

std::string print_term(const BindingSignature& sig, const Term& t, const Context& ctx) {
  std::ostringstream os;
  print_term_rec(os, sig, t, ctx);
  return os.str();
}

Context parse_context_spec(const BindingSignature& sig, std::string_view text) {
  Cur cur{lex_line(std::string(text), 1)};
  Context c = parse_ctx_tokens(cur, sig);
  if (!cur.at_end()) cur.fail("trailing tokens after the context");
  return c;
}

std::string print_context_spec(const BindingSignature& sig, const Context& ctx) {
  std::ostringstream os;
  print_ctx_spec(os, sig, ctx);
  return os.str();
}

Relation parse_relation(const BindingSignature& sig, std::string_view text) {
  Relation r;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::optional<SortId> sort;
  Context ctx = sig.empty_context();
  while (std::getline(in, line)) {
    ++lineno;
    Cur cur{lex_line(line, lineno)};
    if (cur.at_end()) continue;
    if (cur.is_ident("pairs")) {
      cur.next();
      sort = expect_sort(cur, sig);
      cur.expect_punct("@");
      ctx = parse_ctx_at(cur, sig);
      if (!cur.at_end()) cur.fail("trailing tokens after the block header");
      continue;
    }
    if (!sort) cur.fail("expected a 'pairs SORT@CTX' header first");
    MetaScope metas;
    Term a = parse_whole_term(cur, sig, *sort, ctx, metas);
    cur.expect_punct("~");
    Term bterm = parse_whole_term(cur, sig, *sort, ctx, metas);
    if (!cur.at_end()) cur.fail("trailing tokens after the pair");
    well_formed(sig, a, ctx, *sort);
    well_formed(sig, bterm, ctx, *sort);
    relation_insert(r, *sort, ctx, std::move(a), std::move(bterm));
  }
  return r;
}

std::string print_relation(const BindingSignature& sig, const Relation& r) {
  std::ostringstream os;
  for (std::size_t b = 0; b < r.blocks.size(); ++b) {
    if (b > 0) os << '\n';
    const RelationBlock& blk = r.blocks[b];
    os << "pairs " << sig.sorts.name(blk.sort) << '@';
    print_ctx_at(os, sig, blk.ctx);
    os << '\n';
    for (const auto& [x, y] : blk.pairs) {
      print_term_rec(os, sig, x, blk.ctx);
      os << " ~ ";
      print_term_rec(os, sig, y, blk.ctx);
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace opsem
