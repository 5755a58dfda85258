#include "opsem/syntax.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <tuple>

namespace opsem {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t string_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

}  // namespace

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return mix(seed ^ (v + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

std::uint64_t context_hash(const Context& c) {
  std::uint64_t h = 17;
  for (int n : c.counts) h = hash_combine(h, static_cast<std::uint64_t>(n));
  return h;
}

std::optional<SortId> SortTable::id(std::string_view n) const {
  for (int i = 0; i < size(); ++i)
    if (names[i] == n) return i;
  return std::nullopt;
}

const Coercion* SortTable::from(SortId sub) const {
  for (const auto& c : coercions)
    if (c.sub == sub) return &c;
  return nullptr;
}

const Coercion* SortTable::into(SortId super) const {
  for (const auto& c : coercions)
    if (c.super == super) return &c;
  return nullptr;
}

SortTable SortTable::make(std::vector<std::string> names, std::vector<Coercion> coercions) {
  SortTable t{std::move(names), std::move(coercions)};
  for (const auto& c : t.coercions) {
    if (c.sub < 0 || c.sub >= t.size() || c.super < 0 || c.super >= t.size() ||
        c.sub == c.super)
      throw StructuralError("coercion references invalid sorts");
    if (t.from(c.super)) throw StructuralError("coercion chains are not supported");
  }
  for (int s = 0; s < t.size(); ++s) {
    int out = 0, in = 0;
    for (const auto& c : t.coercions) {
      out += (c.sub == s);
      in += (c.super == s);
    }
    if (out > 1 || in > 1)
      throw StructuralError("at most one coercion per sort in each direction");
  }
  return t;
}

bool Context::closed() const {
  return std::all_of(counts.begin(), counts.end(), [](int n) { return n == 0; });
}

std::optional<int> BindingSignature::op_id(std::string_view name) const {
  for (int i = 0; i < static_cast<int>(ops.size()); ++i)
    if (ops[i].name == name) return i;
  return std::nullopt;
}

Context BindingSignature::context(std::initializer_list<std::pair<SortId, int>> entries) const {
  Context c = empty_context();
  for (auto [s, n] : entries) {
    if (s < 0 || s >= sorts.size()) throw StructuralError("context sort out of range");
    c.counts[s] += n;
  }
  return c;
}

Context BindingSignature::extend(const Context& c, const Context& binds) const {
  if (c.counts.size() != binds.counts.size())
    throw StructuralError("context arity mismatch in extend");
  Context r = c;
  for (std::size_t i = 0; i < r.counts.size(); ++i) r.counts[i] += binds.counts[i];
  return r;
}

int BindingSignature::supply(const Context& c, SortId s) const {
  int n = c.counts.at(s);
  if (const Coercion* co = sorts.into(s); co && co->counterpart)
    n += c.counts.at(co->sub);
  return n;
}

std::vector<ArgSpec> BindingSignature::arg_specs_at(int id, SortId ann) const {
  const Operator& o = op(id);
  if (ann == o.result) return o.args;
  if (o.kind == OpKind::Value) {
    const Coercion* co = sorts.from(o.result);
    if (co && co->super == ann && co->counterpart) {
      std::vector<ArgSpec> specs = o.args;
      for (int i = 0; i < o.actives; ++i) specs[i].sort = ann;
      return specs;
    }
  }
  throw StructuralError("operator " + o.name + " used at wrong sort");
}

void BindingSignature::check() const {
  for (const auto& o : ops) {
    if (o.result < 0 || o.result >= sorts.size())
      throw StructuralError("operator result sort out of range: " + o.name);
    for (const auto& a : o.args) {
      if (a.sort < 0 || a.sort >= sorts.size())
        throw StructuralError("operator argument sort out of range: " + o.name);
      if (static_cast<int>(a.binds.counts.size()) != sorts.size())
        throw StructuralError("operator binder context arity mismatch: " + o.name);
    }
    if (o.kind == OpKind::Plain) continue;
    if (!binding_sort) throw StructuralError("value/program operator without binding sort");
    if (o.kind == OpKind::Value) {
      const Coercion* co = sorts.from(o.result);
      if (!co || !co->counterpart)
        throw StructuralError("value operator needs a counterpart coercion: " + o.name);
      if (o.actives < 0 || o.actives > static_cast<int>(o.args.size()))
        throw StructuralError("value operator active count out of range: " + o.name);
      for (int i = 0; i < o.actives; ++i)
        if (o.args[i].sort != o.result || !o.args[i].binds.closed())
          throw StructuralError("value operator actives must be unbound values: " + o.name);
      for (int i = o.actives; i < static_cast<int>(o.args.size()); ++i) {
        if (o.args[i].sort != co->super)
          throw StructuralError("value operator passives must be program-sorted: " + o.name);
        for (int s = 0; s < sorts.size(); ++s)
          if (o.args[i].binds.counts[s] != 0 && s != *binding_sort)
            throw StructuralError("value operator passive binds outside binding sort: " + o.name);
      }
    } else {  // Program
      for (const auto& a : o.args) {
        if (a.sort != o.result)
          throw StructuralError("program operator arguments must share its sort: " + o.name);
        for (int s = 0; s < sorts.size(); ++s)
          if (a.binds.counts[s] != 0 && s != *binding_sort)
            throw StructuralError("program operator binds outside binding sort: " + o.name);
      }
    }
  }
}

TermNode::TermNode(Tag t, SortId s, int i, std::optional<MetaVar> m, std::vector<Term> a)
    : tag(t), sort(s), index(i), mv(std::move(m)), args(std::move(a)) {
  std::uint64_t h = hash_combine(static_cast<std::uint64_t>(tag),
                                 static_cast<std::uint64_t>(sort));
  h = hash_combine(h, static_cast<std::uint64_t>(index));
  int sz = 1;
  if (mv) {
    h = hash_combine(h, string_hash(mv->name));
    h = hash_combine(h, context_hash(mv->params));
    h = hash_combine(h, static_cast<std::uint64_t>(mv->sort));
  }
  for (const auto& arg : args) {
    h = hash_combine(h, arg->hash);
    sz += arg->size;
  }
  hash = h;
  size = sz;
}

Term var_(SortId sort, int index) {
  if (index < 1) throw StructuralError("variable indices are 1-based");
  return std::make_shared<TermNode>(Tag::Var, sort, index, std::nullopt, std::vector<Term>{});
}

Term meta_(MetaVar mv, std::vector<Term> args) {
  int want = 0;
  for (int n : mv.params.counts) want += n;
  if (static_cast<int>(args.size()) != want)
    throw StructuralError("metavariable " + mv.name + " expects " + std::to_string(want) +
                          " arguments, got " + std::to_string(args.size()));
  int k = 0;
  for (SortId s = 0; s < static_cast<int>(mv.params.counts.size()); ++s)
    for (int i = 0; i < mv.params.counts[s]; ++i, ++k)
      if (args[k]->sort != s)
        throw StructuralError("metavariable " + mv.name + " argument " +
                              std::to_string(k + 1) + " has wrong sort");
  SortId sort = mv.sort;
  return std::make_shared<TermNode>(Tag::Meta, sort, 0, std::move(mv), std::move(args));
}

Term op_(const BindingSignature& sig, int op, SortId ann, std::vector<Term> args) {
  const Operator& o = sig.op(op);
  std::vector<ArgSpec> specs = sig.arg_specs_at(op, ann);
  if (args.size() != specs.size())
    throw StructuralError("operator " + o.name + " expects " + std::to_string(specs.size()) +
                          " arguments, got " + std::to_string(args.size()));
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i]->sort != specs[i].sort)
      throw StructuralError("operator " + o.name + " argument " + std::to_string(i + 1) +
                            " has wrong sort");
  return std::make_shared<TermNode>(Tag::Op, ann, op, std::nullopt, std::move(args));
}

Term coerce_(const BindingSignature& sig, const Term& t) {
  const Coercion* co = sig.sorts.from(t->sort);
  if (!co) throw StructuralError("no coercion declared from that sort");
  if (!co->counterpart)
    return std::make_shared<TermNode>(Tag::Coerce, co->super, 0, std::nullopt,
                                      std::vector<Term>{t});
  switch (t->tag) {
    case Tag::Var:
      // Counterpart variables occupy the leading super-sort indices.
      return var_(co->super, t->index);
    case Tag::Op: {
      const Operator& o = sig.op(t->index);
      if (o.kind != OpKind::Value || t->sort != o.result)
        throw StructuralError("cannot coerce non-value operator application");
      std::vector<Term> args = t->args;
      for (int i = 0; i < o.actives; ++i) args[i] = coerce_(sig, args[i]);
      return op_(sig, t->index, co->super, std::move(args));
    }
    case Tag::Meta:
      return std::make_shared<TermNode>(Tag::Coerce, co->super, 0, std::nullopt,
                                        std::vector<Term>{t});
    case Tag::Coerce:
      throw StructuralError("coercion applied twice");
  }
  throw StructuralError("unreachable");
}

bool equal(const Term& a, const Term& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->tag != b->tag || a->sort != b->sort ||
      a->index != b->index || a->args.size() != b->args.size())
    return false;
  if (a->mv.has_value() != b->mv.has_value()) return false;
  if (a->mv && !(*a->mv == *b->mv)) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

int compare(const Term& a, const Term& b) {
  if (a.get() == b.get()) return 0;
  if (a->size != b->size) return a->size < b->size ? -1 : 1;
  if (a->tag != b->tag) return a->tag < b->tag ? -1 : 1;
  if (a->sort != b->sort) return a->sort < b->sort ? -1 : 1;
  if (a->index != b->index) return a->index < b->index ? -1 : 1;
  if (a->mv.has_value() != b->mv.has_value()) return a->mv ? 1 : -1;
  if (a->mv) {
    if (int c = a->mv->name.compare(b->mv->name)) return c < 0 ? -1 : 1;
    if (a->mv->sort != b->mv->sort) return a->mv->sort < b->mv->sort ? -1 : 1;
    if (a->mv->params.counts != b->mv->params.counts)
      return a->mv->params.counts < b->mv->params.counts ? -1 : 1;
  }
  if (a->args.size() != b->args.size()) return a->args.size() < b->args.size() ? -1 : 1;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (int c = compare(a->args[i], b->args[i])) return c;
  return 0;
}

std::uint64_t term_hash(const Term& t) { return t->hash; }

namespace {

// A supply-level index resolved to its declared block.
struct VarRef {
  bool counterpart = false;  // index denotes the coerced (sub, i) variable
  SortId sort = -1;          // declared sort (the sub sort when counterpart)
  int i = 0;                 // 1-based declared index within that sort
};

VarRef decode_var(const BindingSignature& sig, const Context& c, SortId s, int j) {
  if (j < 1 || j > sig.supply(c, s))
    throw StructuralError("variable index out of context bounds");
  if (const Coercion* co = sig.sorts.into(s); co && co->counterpart) {
    int m = c.counts.at(co->sub);
    if (j <= m) return VarRef{true, co->sub, j};
    return VarRef{false, s, j - m};
  }
  return VarRef{false, s, j};
}

// Supply index of declared variable (s, i) in context c.
int encode_var(const BindingSignature& sig, const Context& c, SortId s, int i) {
  if (const Coercion* co = sig.sorts.into(s); co && co->counterpart)
    return c.counts.at(co->sub) + i;
  return i;
}

}  // namespace

void well_formed(const BindingSignature& sig, const Term& t, const Context& ctx,
                 SortId expected) {
  if (t->sort != expected)
    throw StructuralError("term sort mismatch: expected " + sig.sorts.name(expected) +
                          ", got " + sig.sorts.name(t->sort));
  switch (t->tag) {
    case Tag::Var:
      decode_var(sig, ctx, t->sort, t->index);
      return;
    case Tag::Meta: {
      int k = 0;
      for (SortId s = 0; s < sig.sorts.size(); ++s)
        for (int i = 0; i < t->mv->params.counts[s]; ++i, ++k)
          well_formed(sig, t->args[k], ctx, s);
      return;
    }
    case Tag::Op: {
      std::vector<ArgSpec> specs = sig.arg_specs_at(t->index, t->sort);
      for (std::size_t i = 0; i < specs.size(); ++i)
        well_formed(sig, t->args[i], sig.extend(ctx, specs[i].binds), specs[i].sort);
      return;
    }
    case Tag::Coerce: {
      const Term& inner = t->args[0];
      const Coercion* co = sig.sorts.from(inner->sort);
      if (!co || co->super != t->sort)
        throw StructuralError("coercion node does not match a declared coercion");
      if (co->counterpart && inner->tag != Tag::Meta)
        throw StructuralError("counterpart coercion left unnormalised");
      well_formed(sig, inner, ctx, inner->sort);
      return;
    }
  }
}

Substitution identity_subst(const BindingSignature& sig, const Context& ctx) {
  Substitution s{ctx, ctx, {}};
  s.map.resize(sig.sorts.size());
  for (SortId so = 0; so < sig.sorts.size(); ++so)
    for (int i = 1; i <= ctx.counts[so]; ++i)
      s.map[so].push_back(var_(so, encode_var(sig, ctx, so, i)));
  return s;
}

Term weaken(const BindingSignature& sig, const Term& t, const Context& from,
            const Context& binds, const Context& inner) {
  switch (t->tag) {
    case Tag::Var: {
      Context src = sig.extend(from, inner);
      VarRef r = decode_var(sig, src, t->sort, t->index);
      int ni = r.i <= from.counts[r.sort] ? r.i : r.i + binds.counts[r.sort];
      int idx;
      if (r.counterpart) {
        idx = ni;  // counterpart of (sub, ni): leading block, same index
      } else {
        Context tgt = sig.extend(sig.extend(from, binds), inner);
        idx = encode_var(sig, tgt, r.sort, ni);
      }
      return var_(t->sort, idx);
    }
    case Tag::Meta: {
      std::vector<Term> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(weaken(sig, a, from, binds, inner));
      return meta_(*t->mv, std::move(args));
    }
    case Tag::Op: {
      std::vector<ArgSpec> specs = sig.arg_specs_at(t->index, t->sort);
      std::vector<Term> args;
      args.reserve(t->args.size());
      for (std::size_t i = 0; i < specs.size(); ++i)
        args.push_back(
            weaken(sig, t->args[i], from, binds, sig.extend(inner, specs[i].binds)));
      return op_(sig, t->index, t->sort, std::move(args));
    }
    case Tag::Coerce:
      return coerce_(sig, weaken(sig, t->args[0], from, binds, inner));
  }
  throw StructuralError("unreachable");
}

Substitution up(const BindingSignature& sig, const Substitution& s, const Context& binds) {
  Substitution r{sig.extend(s.source, binds), sig.extend(s.target, binds), {}};
  r.map.resize(sig.sorts.size());
  for (SortId so = 0; so < sig.sorts.size(); ++so) {
    r.map[so].reserve(s.map[so].size() + binds.counts[so]);
    for (const auto& img : s.map[so])
      r.map[so].push_back(weaken(sig, img, s.target, binds, sig.empty_context()));
    for (int i = 1; i <= binds.counts[so]; ++i)
      r.map[so].push_back(var_(so, encode_var(sig, r.target, so, s.target.counts[so] + i)));
  }
  return r;
}

Term substitute(const BindingSignature& sig, const Term& t, const Substitution& s) {
  switch (t->tag) {
    case Tag::Var: {
      VarRef r = decode_var(sig, s.source, t->sort, t->index);
      if (r.i > static_cast<int>(s.map[r.sort].size()))
        throw StructuralError("substitution does not cover a variable");
      const Term& img = s.map[r.sort][r.i - 1];
      return r.counterpart ? coerce_(sig, img) : img;
    }
    case Tag::Meta: {
      std::vector<Term> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(substitute(sig, a, s));
      return meta_(*t->mv, std::move(args));
    }
    case Tag::Op: {
      std::vector<ArgSpec> specs = sig.arg_specs_at(t->index, t->sort);
      std::vector<Term> args;
      args.reserve(t->args.size());
      for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].binds.closed())
          args.push_back(substitute(sig, t->args[i], s));
        else
          args.push_back(substitute(sig, t->args[i], up(sig, s, specs[i].binds)));
      }
      return op_(sig, t->index, t->sort, std::move(args));
    }
    case Tag::Coerce:
      return coerce_(sig, substitute(sig, t->args[0], s));
  }
  throw StructuralError("unreachable");
}

Term rename(const BindingSignature& sig, const Term& t, const Substitution& s) {
  for (const auto& per_sort : s.map)
    for (const auto& img : per_sort)
      if (img->tag != Tag::Var) throw StructuralError("rename requires variable images");
  return substitute(sig, t, s);
}

const Term* MetaEnv::find(std::string_view name) const {
  for (const auto& [n, t] : entries)
    if (n == name) return &t;
  return nullptr;
}

void MetaEnv::set(const std::string& name, Term t) {
  for (auto& [n, e] : entries)
    if (n == name) {
      e = std::move(t);
      return;
    }
  entries.emplace_back(name, std::move(t));
}

namespace {

Term instantiate_at(const BindingSignature& sig, const Term& t, const MetaEnv& env,
                    const Context& ambient, const Context& inner) {
  switch (t->tag) {
    case Tag::Var:
      return t;
    case Tag::Meta: {
      const Term* entry = env.find(t->mv->name);
      if (!entry)
        throw StructuralError("metavariable " + t->mv->name + " has no environment entry");
      std::vector<Term> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args)
        args.push_back(instantiate_at(sig, a, env, ambient, inner));
      // The entry lives in the parameter context. View it in current+params,
      // then map current variables to themselves and parameters to the
      // instantiated arguments.
      Context current = sig.extend(ambient, inner);
      const Context& params = t->mv->params;
      Term shifted = weaken(sig, *entry, sig.empty_context(), current, params);
      Substitution s{sig.extend(current, params), current, {}};
      s.map.resize(sig.sorts.size());
      std::vector<int> arg_base(sig.sorts.size(), 0);
      {
        int k = 0;
        for (SortId so = 0; so < sig.sorts.size(); ++so) {
          arg_base[so] = k;
          k += params.counts[so];
        }
      }
      for (SortId so = 0; so < sig.sorts.size(); ++so) {
        for (int i = 1; i <= current.counts[so]; ++i)
          s.map[so].push_back(var_(so, encode_var(sig, current, so, i)));
        for (int i = 0; i < params.counts[so]; ++i)
          s.map[so].push_back(args[arg_base[so] + i]);
      }
      return substitute(sig, shifted, s);
    }
    case Tag::Op: {
      std::vector<ArgSpec> specs = sig.arg_specs_at(t->index, t->sort);
      std::vector<Term> args;
      args.reserve(t->args.size());
      for (std::size_t i = 0; i < specs.size(); ++i)
        args.push_back(instantiate_at(sig, t->args[i], env, ambient,
                                      sig.extend(inner, specs[i].binds)));
      return op_(sig, t->index, t->sort, std::move(args));
    }
    case Tag::Coerce:
      return coerce_(sig, instantiate_at(sig, t->args[0], env, ambient, inner));
  }
  throw StructuralError("unreachable");
}

}  // namespace

Term instantiate(const BindingSignature& sig, const Term& t, const MetaEnv& env,
                 const Context& ambient) {
  return instantiate_at(sig, t, env, ambient, sig.empty_context());
}

std::vector<Term> enumerate_terms(const BindingSignature& sig, SortId sort,
                                  const Context& ctx, int max_size) {
  std::map<std::tuple<SortId, std::vector<int>, int>, std::vector<Term>> memo;

  std::function<const std::vector<Term>&(SortId, const Context&, int)> exact =
      [&](SortId s, const Context& c, int size) -> const std::vector<Term>& {
    auto key = std::make_tuple(s, c.counts, size);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::vector<Term> out;
    if (size == 1) {
      int n = sig.supply(c, s);
      for (int j = 1; j <= n; ++j) out.push_back(var_(s, j));
    }
    for (int id = 0; id < static_cast<int>(sig.ops.size()) && size >= 1; ++id) {
      const Operator& o = sig.op(id);
      bool usable = o.result == s;
      if (!usable && o.kind == OpKind::Value) {
        const Coercion* co = sig.sorts.from(o.result);
        usable = co && co->super == s && co->counterpart;
      }
      if (!usable) continue;
      std::vector<ArgSpec> specs = sig.arg_specs_at(id, s);
      int parts = static_cast<int>(specs.size());
      if (parts == 0) {
        if (size == 1) out.push_back(op_(sig, id, s, {}));
        continue;
      }
      int budget = size - 1;
      if (budget < parts) continue;
      std::vector<int> split(parts, 1);
      std::function<void(int, int)> go = [&](int pos, int remaining) {
        if (pos == parts - 1) {
          split[pos] = remaining;
          std::vector<std::vector<Term>> choices(parts);
          for (int i = 0; i < parts; ++i) {
            choices[i] = exact(specs[i].sort, sig.extend(c, specs[i].binds), split[i]);
            if (choices[i].empty()) return;
          }
          std::vector<int> idx(parts, 0);
          while (true) {
            std::vector<Term> args;
            args.reserve(parts);
            for (int i = 0; i < parts; ++i) args.push_back(choices[i][idx[i]]);
            out.push_back(op_(sig, id, s, std::move(args)));
            int i = parts - 1;
            while (i >= 0 && ++idx[i] == static_cast<int>(choices[i].size())) {
              idx[i] = 0;
              --i;
            }
            if (i < 0) break;
          }
          return;
        }
        for (int take = 1; take <= remaining - (parts - 1 - pos); ++take) {
          split[pos] = take;
          go(pos + 1, remaining - take);
        }
      };
      go(0, budget);
    }
    if (const Coercion* co = sig.sorts.into(s); co && !co->counterpart && size >= 2)
      for (const auto& sub : exact(co->sub, c, size - 1)) out.push_back(coerce_(sig, sub));
    auto [pos, inserted] = memo.emplace(std::move(key), std::move(out));
    (void)inserted;
    return pos->second;
  };

  std::vector<Term> all;
  for (int size = 1; size <= max_size; ++size) {
    const auto& layer = exact(sort, ctx, size);
    all.insert(all.end(), layer.begin(), layer.end());
  }
  return all;
}

}  // namespace opsem
