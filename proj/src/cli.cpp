#include "opsem/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include "opsem/eval.hpp"
#include "opsem/howe.hpp"
#include "opsem/sigfile.hpp"

namespace opsem {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseFailure {
  std::string file;
  std::vector<FileDiagnostic> diagnostics;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DynamicSignature parse_file(const std::string& path) {
  SignatureParse parsed = parse_signature(slurp(path));
  if (!parsed.dsig) throw ParseFailure{path, std::move(parsed.diagnostics)};
  return std::move(*parsed.dsig);
}

json diagnostics_json(const ValidationReport& rep) {
  json arr = json::array();
  for (const Diagnostic& d : rep.diagnostics)
    arr.push_back(
        {{"code", d.code}, {"message", d.message}, {"rule", d.rule}, {"premise", d.premise}});
  return arr;
}

// a validated signature or a definite failure carried as diagnostics
DynamicSignature load_validated(const std::string& path, ValidationReport& rep) {
  DynamicSignature dsig = parse_file(path);
  rep = validate_signature(dsig);
  return dsig;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

json base_report(const char* command, const std::vector<std::string>& argv) {
  json j;
  j["command"] = command;
  j["argv"] = argv;
  return j;
}

void emit(const json& j, bool as_json, std::ostream& out, const std::string& text) {
  if (as_json)
    out << j.dump(2) << "\n";
  else
    out << text;
}

std::string closing_text(const BindingSignature& sig, const Closing& c) {
  std::string s;
  Context closed = sig.empty_context();
  for (SortId so = 0; so < sig.sorts.size(); ++so)
    for (std::size_t i = 0; i < c.map[so].size(); ++i) {
      if (!s.empty()) s += ", ";
      s += sig.sorts.name(so) + std::to_string(i + 1) + ":=" +
           print_term(sig, c.map[so][i].term, closed);
    }
  return s;
}

json closing_json(const BindingSignature& sig, const Closing& c) {
  json j = json::object();
  Context closed = sig.empty_context();
  for (SortId so = 0; so < sig.sorts.size(); ++so)
    for (std::size_t i = 0; i < c.map[so].size(); ++i)
      j[sig.sorts.name(so) + std::to_string(i + 1)] =
          print_term(sig, c.map[so][i].term, closed);
  return j;
}

json witness_json(const DynamicSignature& dsig, const Witness& w) {
  const BindingSignature& sig = dsig.sig;
  Context closed = sig.empty_context();
  json j;
  j["from"] = w.from_left ? "left" : "right";
  j["left"] = print_term(sig, w.left, closed);
  j["right"] = print_term(sig, w.right, closed);
  j["depth"] = w.depth;
  if (w.label >= 0) {
    j["label"] = dsig.labels[w.label].name;
    j["target"] =
        w.target ? json(print_term(sig, w.target, dsig.labels[w.label].tgt_ctx)) : json();
  }
  if (w.closing) j["closing"] = closing_json(sig, *w.closing);
  return j;
}

std::string witness_text(const DynamicSignature& dsig, const Witness& w) {
  const BindingSignature& sig = dsig.sig;
  Context closed = sig.empty_context();
  std::string s = "  [depth " + std::to_string(w.depth) + "] " +
                  (w.from_left ? "left" : "right") + ": " + print_term(sig, w.left, closed) +
                  " ~ " + print_term(sig, w.right, closed);
  if (w.label >= 0) {
    s += " =" + dsig.labels[w.label].name + "=> ";
    s += w.target ? print_term(sig, w.target, dsig.labels[w.label].tgt_ctx) : "?";
  }
  if (w.closing) s += "  {" + closing_text(sig, *w.closing) + "}";
  return s + "\n";
}

json issue_json(const DynamicSignature& dsig, const RelationIssue& is) {
  const BindingSignature& sig = dsig.sig;
  Context closed = sig.empty_context();
  json j;
  j["definite"] = is.definite;
  j["from"] = is.from_left ? "left" : "right";
  j["left"] = print_term(sig, is.left, closed);
  j["right"] = print_term(sig, is.right, closed);
  if (is.label >= 0) {
    j["label"] = dsig.labels[is.label].name;
    j["target"] =
        is.target ? json(print_term(sig, is.target, dsig.labels[is.label].tgt_ctx)) : json();
  }
  if (is.closing) j["closing"] = closing_json(sig, *is.closing);
  if (is.escaped)
    j["escaped"] = {print_term(sig, is.escaped->first, closed),
                    print_term(sig, is.escaped->second, closed)};
  return j;
}

int cmd_validate(const std::vector<std::string>& argv, const std::string& file, bool as_json,
                 std::ostream& out) {
  Timer timer;
  json j = base_report("validate", argv);
  j["file"] = file;
  ValidationReport rep;
  DynamicSignature dsig = load_validated(file, rep);
  j["ok"] = rep.ok;
  j["diagnostics"] = diagnostics_json(rep);
  json table = json::array();
  for (const auto& [head, label, rules] : rep.table)
    table.push_back({{"head", head}, {"label", label}, {"rules", rules}});
  j["table"] = table;
  j["elapsed_ms"] = timer.ms();

  std::string text;
  if (rep.ok) {
    text = "ok: " + std::to_string(dsig.expanded.size()) + " rules, " +
           std::to_string(dsig.labels.size()) + " labels\n";
    for (const auto& [head, label, rules] : rep.table) {
      text += "  " + head + " =" + label + "=>";
      for (const std::string& r : rules) text += " " + r;
      text += "\n";
    }
  } else {
    for (const Diagnostic& d : rep.diagnostics) {
      text += d.code + " (rule " + d.rule;
      if (d.premise > 0) text += ", premise " + std::to_string(d.premise);
      text += "): " + d.message + "\n";
    }
  }
  emit(j, as_json, out, text);
  return rep.ok ? 0 : 1;
}

int cmd_rigidify(const std::vector<std::string>& argv, const std::string& file,
                 const std::string& out_path, bool as_json, std::ostream& out) {
  Timer timer;
  json j = base_report("rigidify", argv);
  j["file"] = file;
  j["output"] = out_path;
  DynamicSignature dsig = parse_file(file);
  RigidifyResult res = rigidify(dsig);

  std::ofstream of(out_path, std::ios::binary);
  if (!of) throw UsageError("cannot write " + out_path);
  of << print_signature(res.dsig);

  json mapping = json::array();
  for (const auto& [origin, generated] : res.mapping)
    mapping.push_back({{"origin", origin}, {"rule", generated}});
  j["mapping"] = mapping;
  json labels = json::array();
  for (const Label& l : res.dsig.labels) labels.push_back(l.name);
  j["labels"] = labels;
  j["elapsed_ms"] = timer.ms();

  std::string text = "wrote " + out_path + ": " + std::to_string(res.dsig.rules.size()) +
                     " rules, " + std::to_string(res.dsig.labels.size()) + " labels\n";
  for (const auto& [origin, generated] : res.mapping)
    text += "  " + origin + " => " + generated + "\n";
  emit(j, as_json, out, text);
  return 0;
}

int cmd_eval(const std::vector<std::string>& argv, const std::string& file,
             const std::string& term_text, const std::string& label_name, int fuel, bool trace,
             bool as_json, std::ostream& out) {
  Timer timer;
  json j = base_report("eval", argv);
  j["file"] = file;
  j["parameters"] = {{"term", term_text}, {"label", label_name}, {"fuel", fuel}};
  ValidationReport vrep;
  DynamicSignature dsig = load_validated(file, vrep);
  if (!vrep.ok) {
    j["ok"] = false;
    j["diagnostics"] = diagnostics_json(vrep);
    emit(j, as_json, out, "signature does not validate\n");
    return 1;
  }
  std::optional<int> label = dsig.label_id(label_name);
  if (!label) throw UsageError("unknown label " + label_name);
  const Label& lb = dsig.label(*label);
  Term t = parse_term(dsig.sig, term_text, lb.src_sort, lb.src_ctx);

  EvalSession session(dsig);
  TransitionSet ts = session.transitions(t, *label, fuel);
  json targets = json::array();
  std::string text;
  for (const Term& target : ts.targets) {
    std::string p = print_term(dsig.sig, target, lb.tgt_ctx);
    targets.push_back(p);
    text += "=> " + p + "\n";
  }
  text += ts.fuel_exhausted ? "fuel exhausted\n" : "complete\n";
  j["targets"] = targets;
  j["fuel_exhausted"] = ts.fuel_exhausted;

  if (trace) {
    auto render = [&](auto&& self, const Derivation& d, int indent) -> json {
      const Label& dl = dsig.label(d.label);
      std::string line(indent * 2, ' ');
      line += dsig.expanded[d.rule].name + ": " + print_term(dsig.sig, d.source, dl.src_ctx) +
              " =" + dl.name + "=> " + print_term(dsig.sig, d.target, dl.tgt_ctx);
      text += line + "\n";
      json dj;
      dj["rule"] = dsig.expanded[d.rule].name;
      dj["label"] = dl.name;
      dj["source"] = print_term(dsig.sig, d.source, dl.src_ctx);
      dj["target"] = print_term(dsig.sig, d.target, dl.tgt_ctx);
      dj["premises"] = json::array();
      for (const Derivation& p : d.premises) dj["premises"].push_back(self(self, p, indent + 1));
      return dj;
    };
    json derivations = json::array();
    for (const Derivation& d : session.derivation_trace(t, *label, fuel))
      derivations.push_back(render(render, d, 0));
    j["derivations"] = derivations;
  }
  j["elapsed_ms"] = timer.ms();
  emit(j, as_json, out, text);
  if (!ts.targets.empty()) return 0;
  return ts.fuel_exhausted ? 2 : 1;
}

int cmd_bisim(const std::vector<std::string>& argv, const std::string& file,
              const std::string& t1_text, const std::string& t2_text, int depth, int fuel,
              int pool_size, bool values_only, bool as_json, std::ostream& out) {
  Timer timer;
  json j = base_report("bisim", argv);
  j["file"] = file;
  j["parameters"] = {{"depth", depth},
                     {"fuel", fuel},
                     {"pool", {{"size", pool_size}, {"values_only", values_only}}}};
  ValidationReport vrep;
  DynamicSignature dsig = load_validated(file, vrep);
  if (!vrep.ok) {
    j["ok"] = false;
    j["diagnostics"] = diagnostics_json(vrep);
    emit(j, as_json, out, "signature does not validate\n");
    return 1;
  }
  if (dsig.labels.empty()) throw UsageError("signature has no labels");
  const Label& lb = dsig.labels[0];
  Term t1 = parse_term(dsig.sig, t1_text, lb.src_sort, lb.src_ctx);
  Term t2 = parse_term(dsig.sig, t2_text, lb.src_sort, lb.src_ctx);

  SubstPool pool = make_pool(dsig.sig, pool_size, values_only);
  Verdict v = bounded_bisim(dsig, t1, t2, depth, fuel, pool);
  j["verdict"] = verdict_name(v.kind);
  json trail = json::array();
  std::string text = std::string("verdict: ") + verdict_name(v.kind) + "\n";
  for (const Witness& w : v.trail) {
    trail.push_back(witness_json(dsig, w));
    text += witness_text(dsig, w);
  }
  j["trail"] = trail;
  j["elapsed_ms"] = timer.ms();
  emit(j, as_json, out, text);
  switch (v.kind) {
    case VerdictKind::Holds:
      return 0;
    case VerdictKind::Fails:
      return 1;
    case VerdictKind::Inconclusive:
      return 2;
  }
  return 3;
}

int cmd_check_rel(const std::vector<std::string>& argv, const std::string& file,
                  const std::string& rel_file, int fuel, int pool_size, bool values_only,
                  bool as_json, std::ostream& out) {
  Timer timer;
  json j = base_report("check-rel", argv);
  j["file"] = file;
  j["relation"] = rel_file;
  j["parameters"] = {{"fuel", fuel},
                     {"pool", {{"size", pool_size}, {"values_only", values_only}}}};
  ValidationReport vrep;
  DynamicSignature dsig = load_validated(file, vrep);
  if (!vrep.ok) {
    j["ok"] = false;
    j["diagnostics"] = diagnostics_json(vrep);
    emit(j, as_json, out, "signature does not validate\n");
    return 1;
  }
  Relation r = parse_relation(dsig.sig, slurp(rel_file));
  SubstPool pool = make_pool(dsig.sig, pool_size, values_only);
  RelationReport rep = check_relation(dsig, r, fuel, pool);

  j["bisimulation"] = rep.bisimulation;
  j["definite"] = rep.definite_count;
  j["inconclusive"] = rep.inconclusive_count;
  json issues = json::array();
  for (const RelationIssue& is : rep.issues) issues.push_back(issue_json(dsig, is));
  j["issues"] = issues;
  j["elapsed_ms"] = timer.ms();

  std::string text = std::string("bisimulation: ") + (rep.bisimulation ? "yes" : "no") +
                     "  definite=" + std::to_string(rep.definite_count) +
                     " inconclusive=" + std::to_string(rep.inconclusive_count) + "\n";
  Context closed = dsig.sig.empty_context();
  for (const RelationIssue& is : rep.issues) {
    text += std::string("  ") + (is.definite ? "definite" : "inconclusive") + ": " +
            print_term(dsig.sig, is.left, closed) + " ~ " +
            print_term(dsig.sig, is.right, closed);
    if (is.label >= 0) text += "  =" + dsig.labels[is.label].name + "=>";
    if (is.target)
      text += " " + print_term(dsig.sig, is.target, dsig.labels[is.label].tgt_ctx);
    text += "\n";
  }
  emit(j, as_json, out, text);
  if (rep.definite_count > 0) return 1;
  return rep.inconclusive_count > 0 ? 2 : 0;
}

int cmd_howe(const std::vector<std::string>& argv, const std::string& file, int size, int depth,
             const std::string& checks, int fuel, int pool_size, bool values_only,
             int ctx_bound, int samples, std::uint64_t seed, bool as_json, std::ostream& out) {
  Timer timer;
  json j = base_report("howe", argv);
  j["file"] = file;
  j["parameters"] = {{"size", size},
                     {"depth", depth},
                     {"checks", checks},
                     {"fuel", fuel},
                     {"pool", {{"size", pool_size}, {"values_only", values_only}}},
                     {"ctx_bound", ctx_bound},
                     {"samples", samples},
                     {"seed", seed}};
  ValidationReport vrep;
  DynamicSignature dsig = load_validated(file, vrep);
  if (!vrep.ok) {
    j["ok"] = false;
    j["diagnostics"] = diagnostics_json(vrep);
    emit(j, as_json, out, "signature does not validate\n");
    return 1;
  }
  Universe u = make_universe(dsig.sig, size, ctx_bound);
  SubstPool pool = make_pool(dsig.sig, pool_size, values_only);
  BaseOracle oracle = bisim_oracle(dsig, pool, depth, fuel);

  FixpointStats stats;
  Relation h = howe_closure(dsig, u, oracle, &stats);
  std::size_t pairs = 0;
  for (const RelationBlock& blk : h.blocks) pairs += blk.pairs.size();
  int additions = howe_step_additions(dsig, u, oracle, h);
  CompositionReport comp = composition_check(dsig, u, h, oracle);

  j["universe"] = {{"blocks", u.blocks.size()}, {"terms", u.term_count()}};
  j["closure"] = {{"pairs", pairs}, {"fixpoint", json::parse(json_report(dsig, stats))}};
  j["step_additions"] = additions;
  j["composition"] = json::parse(json_report(dsig, comp));

  std::string text = "universe: " + std::to_string(u.term_count()) + " terms in " +
                     std::to_string(u.blocks.size()) + " blocks\n" +
                     "closure: " + std::to_string(pairs) + " pairs in " +
                     std::to_string(stats.iterations) + " passes\n" +
                     "step additions: " + std::to_string(additions) + "\n" +
                     "composition: " + (comp.ok ? "ok" : "violated") + " (checked " +
                     std::to_string(comp.checked) + ")\n";

  bool definite = !comp.ok || additions != 0;
  bool findings = false;
  if (checks == "all") {
    SubstitutionReport sub = hetero_substitution_check(dsig, u, h, samples, seed);
    SymmetryReport sym = symmetry_check(relational_transitive_closure(h));
    SimulationReport sim = simulation_check(dsig, u, h, fuel, pool);
    j["substitution"] = json::parse(json_report(dsig, sub));
    j["symmetry"] = json::parse(json_report(dsig, sym));
    j["simulation"] = json::parse(json_report(dsig, sim));
    definite = definite || !sub.ok;
    findings = !sym.ok || sim.definite_count > 0 || sim.inconclusive_count > 0;
    text += "substitution: " + std::string(sub.ok ? "ok" : "violated") + " (applied " +
            std::to_string(sub.applied) + ", skipped " + std::to_string(sub.skipped) + ")\n" +
            "symmetry of transitive closure: " + (sym.ok ? "ok" : "counterexample") + "\n" +
            "simulation: definite=" + std::to_string(sim.definite_count) +
            " inconclusive=" + std::to_string(sim.inconclusive_count) + "\n";
  }
  j["ok"] = !definite;
  j["elapsed_ms"] = timer.ms();
  emit(j, as_json, out, text);
  if (definite) return 1;
  return findings ? 2 : 0;
}

int cmd_congruence(const std::vector<std::string>& argv, const std::string& file, int samples,
                   std::uint64_t seed, int depth, int fuel, int pool_size, bool values_only,
                   int size, int hole_size, int check_depth, bool as_json, std::ostream& out) {
  Timer timer;
  json j = base_report("congruence", argv);
  j["file"] = file;
  j["parameters"] = {{"samples", samples},
                     {"seed", seed},
                     {"depth", depth},
                     {"fuel", fuel},
                     {"pool", {{"size", pool_size}, {"values_only", values_only}}},
                     {"size", size},
                     {"hole_size", hole_size},
                     {"check_depth", check_depth}};
  ValidationReport vrep;
  DynamicSignature dsig = load_validated(file, vrep);
  if (!vrep.ok) {
    j["ok"] = false;
    j["diagnostics"] = diagnostics_json(vrep);
    emit(j, as_json, out, "signature does not validate\n");
    return 1;
  }
  CongruenceParams p;
  p.depth = depth;
  p.fuel = fuel;
  p.pool = make_pool(dsig.sig, pool_size, values_only);
  p.n_samples = samples;
  p.seed = seed;
  p.max_size = size;
  p.hole_size = hole_size;
  p.check_depth = check_depth;
  CongruenceReport rep = congruence_sweep(dsig, p);

  j["report"] = json::parse(json_report(dsig, rep));
  j["ok"] = rep.ok;
  j["elapsed_ms"] = timer.ms();

  std::string text = "pairs=" + std::to_string(rep.pair_population) +
                     " contexts=" + std::to_string(rep.context_population) +
                     " samples=" + std::to_string(rep.samples) +
                     " holds=" + std::to_string(rep.holds) +
                     " inconclusive=" + std::to_string(rep.inconclusive) +
                     " counterexamples=" + std::to_string(rep.counterexamples.size()) + "\n";
  Context closed = dsig.sig.empty_context();
  for (const CongruenceCase& c : rep.counterexamples)
    text += "  " + print_term(dsig.sig, c.left, closed) + " ~ " +
            print_term(dsig.sig, c.right, closed) + "  in  " + c.context + "  => " +
            verdict_name(c.after) + "\n";
  emit(j, as_json, out, text);
  if (!rep.ok) return 1;
  return rep.inconclusive > 0 ? 2 : 0;
}

int cmd_enumerate(const std::vector<std::string>& argv, const std::string& file,
                  const std::string& sort_name, const std::string& ctx_spec, int size,
                  bool as_json, std::ostream& out) {
  Timer timer;
  json j = base_report("enumerate", argv);
  j["file"] = file;
  j["parameters"] = {{"sort", sort_name}, {"ctx", ctx_spec}, {"size", size}};
  DynamicSignature dsig = parse_file(file);
  std::optional<SortId> sort = dsig.sig.sorts.id(sort_name);
  if (!sort) throw UsageError("unknown sort " + sort_name);
  Context ctx =
      ctx_spec.empty() ? dsig.sig.empty_context() : parse_context_spec(dsig.sig, ctx_spec);

  std::vector<Term> terms = enumerate_terms(dsig.sig, *sort, ctx, size);
  json arr = json::array();
  std::string text;
  for (const Term& t : terms) {
    std::string p = print_term(dsig.sig, t, ctx);
    arr.push_back(p);
    text += p + "\n";
  }
  j["terms"] = arr;
  j["count"] = terms.size();
  j["elapsed_ms"] = timer.ms();
  emit(j, as_json, out, text);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"scoped operational semantics toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "emit the JSON report");

  std::string file, term1, term2, rel_file, out_path, label_name, ctx_spec, sort_name;
  std::string checks = "all";
  int fuel = 8, depth = 3, pool_size = 5, sweep_pool_size = 3;
  int size = 5, hole_size = 5, ctx_bound = 2;
  int samples = 200, check_depth = -1;
  std::uint64_t seed = 0;
  bool trace = false, values_only = false;

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a signature file");
  validate->add_option("file", file)->required();

  CLI::App* rigid = app.add_subcommand("rigidify", "compile Howe-style rules to rigid rules");
  rigid->add_option("file", file)->required();
  rigid->add_option("-o,--output", out_path, "output signature file")->required();

  CLI::App* eval = app.add_subcommand("eval", "derive the targets of a term");
  eval->add_option("file", file)->required();
  eval->add_option("term", term1)->required();
  eval->add_option("--label", label_name)->required();
  eval->add_option("--fuel", fuel);
  eval->add_flag("--trace", trace, "print the full derivations");

  CLI::App* bisim = app.add_subcommand("bisim", "bounded bisimilarity of two closed terms");
  bisim->add_option("file", file)->required();
  bisim->add_option("left", term1)->required();
  bisim->add_option("right", term2)->required();
  bisim->add_option("--depth", depth);
  bisim->add_option("--fuel", fuel);
  bisim->add_option("--pool-size", pool_size);
  bisim->add_flag("--values-only", values_only, "restrict the closing pool to values");

  CLI::App* rel = app.add_subcommand("check-rel", "check a relation file for bisimulation");
  rel->add_option("file", file)->required();
  rel->add_option("relation", rel_file)->required();
  rel->add_option("--fuel", fuel);
  rel->add_option("--pool-size", pool_size);
  rel->add_flag("--values-only", values_only);

  CLI::App* howe = app.add_subcommand("howe", "Howe closure and its property sweeps");
  howe->add_option("file", file)->required();
  howe->add_option("--size", size);
  howe->add_option("--depth", depth);
  howe->add_option("--checks", checks)->check(CLI::IsMember({"all", "basic"}));
  howe->add_option("--fuel", fuel);
  howe->add_option("--pool-size", sweep_pool_size);
  howe->add_option("--ctx-bound", ctx_bound);
  howe->add_option("--samples", samples);
  howe->add_option("--seed", seed);
  howe->add_flag("--values-only", values_only);

  CLI::App* cong = app.add_subcommand("congruence", "sampled congruence sweep");
  cong->add_option("file", file)->required();
  cong->add_option("--samples", samples);
  cong->add_option("--seed", seed);
  cong->add_option("--depth", depth);
  cong->add_option("--fuel", fuel);
  cong->add_option("--pool-size", sweep_pool_size);
  cong->add_option("--size", size);
  cong->add_option("--hole-size", hole_size);
  cong->add_option("--check-depth", check_depth);
  cong->add_flag("--values-only", values_only);

  CLI::App* enumerate = app.add_subcommand("enumerate", "list terms of a sort up to a size");
  enumerate->add_option("file", file)->required();
  enumerate->add_option("--sort", sort_name)->required();
  enumerate->add_option("--ctx", ctx_spec, "context spec; empty for closed");
  enumerate->add_option("--size", size);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 3;
  }

  try {
    if (validate->parsed()) return cmd_validate(args, file, as_json, out);
    if (rigid->parsed()) return cmd_rigidify(args, file, out_path, as_json, out);
    if (eval->parsed())
      return cmd_eval(args, file, term1, label_name, fuel, trace, as_json, out);
    if (bisim->parsed())
      return cmd_bisim(args, file, term1, term2, depth, fuel, pool_size, values_only, as_json,
                       out);
    if (rel->parsed())
      return cmd_check_rel(args, file, rel_file, fuel, pool_size, values_only, as_json, out);
    if (howe->parsed())
      return cmd_howe(args, file, size, depth, checks, fuel, sweep_pool_size, values_only,
                      ctx_bound, samples, seed, as_json, out);
    if (cong->parsed())
      return cmd_congruence(args, file, samples, seed, depth, fuel, sweep_pool_size,
                            values_only, size, hole_size, check_depth, as_json, out);
    if (enumerate->parsed())
      return cmd_enumerate(args, file, sort_name, ctx_spec, size, as_json, out);
  } catch (const ParseFailure& f) {
    for (const FileDiagnostic& d : f.diagnostics)
      err << f.file << ":" << d.line << ":" << d.col << ": " << d.message << "\n";
    return 3;
  } catch (const SigParseError& e) {
    err << e.what() << "\n";
    return 3;
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return 3;
  } catch (const StructuralError& e) {
    err << e.what() << "\n";
    return 3;
  }
  return 3;
}

}  // namespace opsem
