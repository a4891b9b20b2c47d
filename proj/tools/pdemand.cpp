// Command-line front end: interpret, differential check, analyze, render.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdemand/analyzer.hpp"
#include "pdemand/chc.hpp"
#include "pdemand/interpreters.hpp"
#include "pdemand/render.hpp"
#include "pdemand/report.hpp"
#include "pdemand/resval.hpp"
#include "pdemand/syntax.hpp"

using namespace pdemand;

namespace {

constexpr int kOk = 0;
constexpr int kParse = 1;
constexpr int kStuck = 2;
constexpr int kBudget = 3;
constexpr int kDisagree = 4;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

/// Parses the file into `out`; on failure prints the error and returns false.
bool load(const std::string& path, std::optional<Program>& out, RunReport& report) {
  auto t0 = Clock::now();
  try {
    out.emplace(parse_program(slurp(path)));
  } catch (const ParseError& e) {
    report.error = path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.what();
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  report.parse_ms = since(t0);
  return out.has_value();
}

int finish(RunReport& report, int code, bool json) {
  report.exit_code = code;
  if (json) {
    std::cout << to_json(report) << '\n';
  } else if (!report.error.empty()) {
    std::cerr << "error: " << report.error << '\n';
  }
  return code;
}

std::string error_text(const EvalError& e) {
  switch (e.kind()) {
    case EvalError::Kind::FuelExhausted: return std::string("fuel exhausted: ") + e.what();
    case EvalError::Kind::DepthExceeded: return std::string("depth exceeded: ") + e.what();
    case EvalError::Kind::Unsupported: return std::string("unsupported: ") + e.what();
    case EvalError::Kind::TypeMismatch: return std::string("type mismatch: ") + e.what();
    case EvalError::Kind::Stuck: return std::string("stuck: ") + e.what();
  }
  return e.what();
}

void add_counters(RunReport& r, const EvalCounters& c) {
  r.counters["rule_firings"] = c.rule_firings;
  r.counters["app_firings"] = c.app_firings;
  r.counters["var_local"] = c.var_local;
  r.counters["var_nonlocal"] = c.var_nonlocal;
  r.counters["cache_hits"] = c.cache_hits;
  r.counters["cache_misses"] = c.cache_misses;
  r.counters["nonlocal_reevaluations"] = c.nonlocal_reevaluations;
}

/// Runs one semantics and returns the forced value.
Value run_semantics(const std::string& semantics, const Program& p, const EvalOptions& opt, RunReport& report) {
  StackPool pool;
  if (semantics == "demand") {
    auto r = eval_demand(p, pool, opt);
    add_counters(report, r.counters);
    return force(r.value);
  }
  if (semantics == "env") {
    auto r = eval_env(p, opt);
    add_counters(report, r.counters);
    return to_value(r.value);
  }
  if (semantics == "chain") {
    auto r = eval_chain(p, pool, opt);
    add_counters(report, r.counters);
    return force(r.value);
  }
  if (semantics == "display") {
    auto r = eval_display(p, opt);
    add_counters(report, r.counters);
    return r.value.literal ? *r.value.literal : Value::of_fun(r.value.fun);
  }
  auto r = eval_optimized(p, pool, opt);
  add_counters(report, r.counters);
  return r.literal ? *r.literal : Value::of_fun(r.fun);
}

// ---------------------------------------------------------------------------

struct InterpArgs {
  std::string path;
  std::string semantics = "demand";
  bool cache = false;
  bool skip_arg = false;
  std::uint64_t fuel = 10'000'000;
  bool trace = false;
  bool json = false;
};

int cmd_interp(const InterpArgs& a) {
  RunReport report;
  report.path = a.path;
  report.mode = "interp:" + a.semantics;
  std::optional<Program> p;
  if (!load(a.path, p, report)) return finish(report, kParse, a.json);

  EvalOptions opt;
  opt.cache = a.cache;
  opt.skip_arg = a.skip_arg;
  opt.fuel = a.fuel;
  if (a.trace) opt.trace = &std::cerr;
  auto t0 = Clock::now();
  try {
    Value v = run_semantics(a.semantics, *p, opt, report);
    report.eval_ms = since(t0);
    report.result = render(v);
  } catch (const EvalError& e) {
    report.eval_ms = since(t0);
    report.error = error_text(e);
    return finish(report, kStuck, a.json);
  }
  if (!a.json) std::cout << report.result << '\n';
  return finish(report, kOk, a.json);
}

// ---------------------------------------------------------------------------

struct CheckArgs {
  std::string path;
  std::uint64_t fuel = 10'000'000;
  bool inject_fault = false;
  bool json = false;
};

int cmd_check(const CheckArgs& a) {
  RunReport report;
  report.path = a.path;
  report.mode = "check";
  std::optional<Program> p;
  if (!load(a.path, p, report)) return finish(report, kParse, a.json);

  struct Outcome {
    std::string name;
    std::optional<Value> value;
    std::string error;
    bool unsupported = false;
  };
  std::vector<Outcome> outcomes;
  auto t0 = Clock::now();
  for (const std::string name : {"demand", "env", "chain", "display", "opt"}) {
    Outcome o{name, std::nullopt, "", false};
    EvalOptions opt;
    opt.fuel = a.fuel;
    if (a.inject_fault && name == "demand") opt.fault = Fault::DemandAddOffByOne;
    if (name != "demand" && name != "env" && !p->is_core()) {
      o.unsupported = true;
      o.error = "unsupported outside the core language";
    } else {
      RunReport scratch;
      try {
        o.value = run_semantics(name, *p, opt, scratch);
      } catch (const EvalError& e) {
        o.unsupported = e.kind() == EvalError::Kind::Unsupported;
        o.error = error_text(e);
      }
    }
    outcomes.push_back(std::move(o));
  }
  report.eval_ms = since(t0);

  // Two semantics agree when both produce equal values or both fail.
  const Outcome& ref = outcomes[1];
  bool agree = true;
  std::ostringstream summary;
  for (const auto& o : outcomes) {
    std::string shown = o.value ? render(*o.value) : o.error;
    bool ok = o.unsupported || (o.value && ref.value && *o.value == *ref.value) || (!o.value && !ref.value);
    if (!ok) agree = false;
    summary << o.name << ": " << shown << (o.unsupported ? "" : ok ? "" : "  MISMATCH") << '\n';
    report.counters[o.name + "_agrees"] = ok && !o.unsupported ? 1 : 0;
  }
  report.result = summary.str();
  if (!a.json) std::cout << report.result << (agree ? "agree\n" : "disagree\n");
  if (!agree) report.error = "semantics disagree";
  return finish(report, agree ? kOk : kDisagree, a.json);
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string path;
  std::size_t k = 2;
  std::size_t eval_depth = 3;
  std::string solver;
  unsigned timeout = 10000;
  std::string dot;
  std::string chc;
  std::uint64_t budget = 1'000'000;
  bool strict_var_visited = false;
  std::optional<std::size_t> fragment_len;
  bool raw = false;
  bool json = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
  RunReport report;
  report.path = a.path;
  report.mode = "analyze";
  std::optional<Program> p;
  if (!load(a.path, p, report)) return finish(report, kParse, a.json);
  if (a.k < 1) {
    report.error = "k must be at least 1";
    return finish(report, kParse, a.json);
  }
  if (a.fragment_len && *a.fragment_len < 1) {
    report.error = "fragment length must be at least 1";
    return finish(report, kParse, a.json);
  }

  std::optional<SolverConfig> solver;
  if (!a.solver.empty()) {
    solver = SolverConfig{a.solver, a.timeout};
  } else if (auto env = solver_from_env()) {
    solver = SolverConfig{env->path, a.timeout};
  }

  AnalyzeConfig cfg;
  cfg.k = a.k;
  cfg.eval_depth = a.eval_depth;
  cfg.solver = solver;
  cfg.node_budget = a.budget;
  cfg.strict_var_visited = a.strict_var_visited;
  cfg.fragment_len = a.fragment_len;

  StackPool pool;
  AnalysisResult res;
  auto t0 = Clock::now();
  try {
    res = analyze(*p, pool, cfg);
  } catch (const BudgetExceeded& e) {
    report.analyze_ms = since(t0);
    report.error = e.what();
    report.counters["nodes"] = e.nodes();
    return finish(report, kBudget, a.json);
  }
  report.analyze_ms = since(t0);

  AbsRes shown = a.raw ? res.result : simplify(res.result);
  report.result = render_compact(shown);
  report.result_json = render_json(shown);
  report.counters["nodes"] = res.stats.nodes;
  report.counters["stubs"] = res.stats.stubs;
  report.counters["stitched_pops"] = res.stats.stitched_pops;
  report.counters["solver_queries"] = res.stats.solver_queries;
  report.counters["fragments"] = res.fragments.size();
  report.counters["atoms"] = atom_count(shown);

  auto t1 = Clock::now();
  VerifyConfig vc{solver, std::max<std::size_t>(a.eval_depth, 4)};
  for (const auto& [node, r] : res.asserts) {
    SolveResult sr = verify_letassert(r, *p, node, vc);
    report.verdicts.push_back({p->node(node).name, p->node_tag(node), std::string(to_string(sr.verdict)), sr.detail});
  }
  report.solve_ms = since(t1);

  if (!a.dot.empty()) write_file(a.dot, render_dot(shown));
  if (!a.chc.empty()) {
    try {
      ChcSystem sys = to_chc(shown);
      std::optional<Query> q;
      if (!res.asserts.empty()) {
        const auto& [node, r] = *res.asserts.begin();
        ChcSystem inner = to_chc(simplify(r));
        q = Query{inner.root, "(not " + predicate_to_smt(*p, node, "q") + ")"};
        sys = std::move(inner);
      }
      write_file(a.chc, emit_smtlib(sys, q));
    } catch (const ChcError& e) {
      std::cerr << "warning: no clause encoding: " << e.what() << '\n';
    }
  }

  if (!a.json) {
    std::cout << render_tree(shown);
    for (const auto& v : report.verdicts) {
      std::cout << "letassert " << v.binder << ": " << v.verdict;
      if (!v.detail.empty()) std::cout << " (" << v.detail << ")";
      std::cout << '\n';
    }
    std::cout << "|S| = " << res.fragments.size() << '\n';
  }
  return finish(report, kOk, a.json);
}

// ---------------------------------------------------------------------------

int cmd_dump_ast(const std::string& path) {
  RunReport report;
  std::optional<Program> p;
  if (!load(path, p, report)) return finish(report, kParse, false);
  std::cout << dump_ast(*p);
  return kOk;
}

int cmd_dot(const std::string& path) {
  try {
    std::string text = slurp(path);
    StackPool pool;
    // Accept either a bare result array or a report carrying one.
    auto j = nlohmann::json::parse(text);
    if (j.is_object() && j.contains("result_json")) text = j["result_json"].dump();
    std::cout << render_dot(parse_result_json(text, pool));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pure demand interpreters and program analysis"};
  app.require_subcommand(1);

  InterpArgs ia;
  auto* interp = app.add_subcommand("interp", "evaluate a program");
  interp->add_option("file", ia.path)->required();
  interp->add_option("--semantics", ia.semantics)
      ->check(CLI::IsMember({"demand", "env", "chain", "display", "opt"}));
  interp->add_flag("--cache", ia.cache);
  interp->add_flag("--skip-arg", ia.skip_arg);
  interp->add_option("--fuel", ia.fuel);
  interp->add_flag("--trace", ia.trace);
  interp->add_flag("--json", ia.json);

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "compare all applicable semantics");
  check->add_option("file", ca.path)->required();
  check->add_option("--fuel", ca.fuel);
  check->add_flag("--inject-fault", ca.inject_fault, "break demand addition (harness self-test)");
  check->add_flag("--json", ca.json);

  AnalyzeArgs aa;
  auto* an = app.add_subcommand("analyze", "all-paths analysis");
  an->add_option("file", aa.path)->required();
  an->add_option("--k", aa.k);
  an->add_option("--eval-depth", aa.eval_depth);
  an->add_option("--solver", aa.solver, "solver executable (default: $PDEMAND_SOLVER)");
  an->add_option("--timeout", aa.timeout, "solver timeout in ms");
  an->add_option("--dot", aa.dot);
  an->add_option("--chc", aa.chc);
  an->add_option("--budget", aa.budget);
  an->add_flag("--strict-var-visited", aa.strict_var_visited);
  an->add_option("--fragment-len", aa.fragment_len, "length of the stack fragments kept for stitching (default: k)");
  an->add_flag("--raw", aa.raw, "print the unsimplified result");
  an->add_flag("--json", aa.json);

  std::string ast_path;
  auto* dump = app.add_subcommand("dump-ast", "print the labeled AST");
  dump->add_option("file", ast_path)->required();

  std::string dot_path;
  auto* dot = app.add_subcommand("dot", "render a JSON result as DOT");
  dot->add_option("file", dot_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*interp) return cmd_interp(ia);
    if (*check) return cmd_check(ca);
    if (*an) return cmd_analyze(aa);
    if (*dump) return cmd_dump_ast(ast_path);
    if (*dot) return cmd_dot(dot_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  }
  return kOk;
}
