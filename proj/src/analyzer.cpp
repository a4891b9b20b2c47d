#include "pdemand/analyzer.hpp"

#include <algorithm>
#include <unordered_map>

#include "pdemand/interpreters.hpp"
#include "pdemand/value.hpp"

namespace pdemand {

BudgetExceeded::BudgetExceeded(std::uint64_t nodes)
    : std::runtime_error("analysis node budget of " + std::to_string(nodes) + " exceeded"), nodes_(nodes) {}

namespace {

void require_core(const Program& p) {
  if (!p.is_core()) throw EvalError(EvalError::Kind::Unsupported, "unsupported in this semantics");
}

struct Fn {
  Label fun;
  Stack stack;
  bool operator==(const Fn&) const = default;
};

/// The all-paths engine. `extended_` selects stubs and parent labels over
/// the core system's empty-set pruning.
class Engine {
 public:
  Engine(const Program& p, StackPool& pool, const AnalyzeConfig& cfg, bool extended)
      : p_(p), pool_(pool), cfg_(cfg), extended_(extended),
        frag_len_(cfg.fragment_len.value_or(extended ? cfg.k : cfg.k + 1)) {}

  AnalysisResult run() {
    AnalysisResult out;
    Out r = eval(pool_.empty(), FragmentSet(), {}, p_.root());
    out.result = std::move(r.r);
    out.fragments = std::move(r.s);
    out.asserts = std::move(asserts_);
    out.branches = std::move(branches_);
    out.stats = stats_;
    return out;
  }

 private:
  struct Out {
    AbsRes r;
    FragmentSet s;
  };

  void tick() {
    if (++stats_.nodes > cfg_.node_budget) throw BudgetExceeded(cfg_.node_budget);
  }

  Label label(NodeId n) const { return *p_.node(n).label; }

  Out stub(const Site& site, Stack s, const FragmentSet& frags) {
    ++stats_.stubs;
    if (!extended_) return {AbsRes(), frags};
    return {AbsRes::single(stub_atom(ParentKey{site, s})), frags};
  }

  AbsRes parent(AbsRes r, const Site& site, Stack s) {
    if (!extended_ || r.empty()) return r;
    return AbsRes::single(labeled_atom(std::move(r), ParentKey{site, s}));
  }

  /// Function values a result may evaluate to.
  std::vector<Fn> functions(const AbsRes& r) {
    std::vector<Fn> out;
    if (!extended_) {
      for (const auto& a : r.atoms()) {
        if (a->kind == AtomKind::Fun) out.push_back({a->fun, a->stack});
      }
      return out;
    }
    auto& bucket = fn_cache_[r.hash()];
    for (const auto& [key, fns] : bucket) {
      if (key == r) return fns;
    }
    ConcSet cs = abs_eval(r, cfg_.eval_depth);
    for (const auto& v : cs.values) {
      if (v.kind == AbsValue::Kind::Fun) out.push_back({v.fun, v.stack});
    }
    bucket.emplace_back(r, out);
    return out;
  }

  Out eval(Stack s, const FragmentSet& frags, const PathCond& pi, NodeId n) {
    tick();
    ++stats_.judgements;
    Out out = step(s, frags, pi, n);
    if (!out.s.includes(frags)) ++stats_.monotonicity_violations;
    return out;
  }

  Out step(Stack s, const FragmentSet& frags, const PathCond& pi, NodeId n) {
    const Node& node = p_.node(n);
    switch (node.kind) {
      case NodeKind::Function: return {AbsRes::single(fun_atom(*node.label, s)), frags};
      case NodeKind::IntLit: return {AbsRes::single(int_atom(node.int_value)), frags};
      case NodeKind::BoolLit: return {AbsRes::single(bool_atom(node.bool_value)), frags};
      case NodeKind::Variable: return var(s, frags, pi, n, *node.label);
      case NodeKind::Application: return app(s, frags, pi, n);
      case NodeKind::BinaryOp: {
        Out l = eval(s, frags, pi, node.children[0]);
        Out r = eval(s, l.s, pi, node.children[1]);
        return {AbsRes::single(op_atom(l.r, node.op, r.r)), r.s};
      }
      case NodeKind::Record: {
        std::vector<AbsRes> parts;
        FragmentSet acc = frags;
        for (NodeId c : node.children) {
          Out f = eval(s, frags, pi, c);
          parts.push_back(std::move(f.r));
          acc = acc.unite(f.s);
        }
        return {AbsRes::single(record_atom(node.fields, std::move(parts))), acc};
      }
      case NodeKind::Projection: {
        Out r = eval(s, frags, pi, node.children[0]);
        return {AbsRes::single(proj_atom(r.r, node.name)), r.s};
      }
      case NodeKind::Inspection: {
        Out r = eval(s, frags, pi, node.children[0]);
        return {AbsRes::single(inspect_atom(node.name, r.r)), r.s};
      }
      case NodeKind::Conditional: {
        Out c = eval(s, frags, pi, node.children[0]);
        Feasibility f = branch_feasibility(c.r, pi, cfg_.eval_depth, cfg_.solver);
        stats_.solver_queries += f.solver_queries;
        branches_.push_back({n, s, f.can_true, f.can_false});
        std::vector<Atom> atoms;
        FragmentSet acc = c.s;
        for (bool b : {true, false}) {
          if (!(b ? f.can_true : f.can_false)) continue;
          PathCond branch_pi{{c.r, b}};
          Out r = eval(s, frags, branch_pi, node.children[b ? 1 : 2]);
          acc = acc.unite(r.s);
          if (!r.r.empty()) atoms.push_back(guarded_atom(c.r, b, r.r));
        }
        return {AbsRes(std::move(atoms)), acc};
      }
      case NodeKind::LetAssert: {
        Out r = eval(s, frags, pi, node.children[0]);
        auto [it, fresh] = asserts_.emplace(n, r.r);
        if (!fresh) it->second = it->second.unite(r.r);
        return r;
      }
    }
    return {AbsRes(), frags};
  }

  std::vector<Stack> pops(Stack s, const FragmentSet& frags) {
    std::vector<Stack> out = stitch(pool_, s, frags, cfg_.k);
    for (Stack t : out) {
      if (t.size() > s.tail().size()) ++stats_.stitched_pops;
    }
    return out;
  }

  Out var(Stack s0, const FragmentSet& frags, const PathCond& pi, NodeId n, Label ctx) {
    const Node& node = p_.node(n);
    Site site = Site::var(node.name, ctx);
    VisitedSet::Entry here{site, s0, frags};
    if (visited_.contains(here)) return stub(site, s0, frags);
    if (s0.empty()) return {AbsRes(), frags};
    auto f = p_.my_fun(p_.node_of(ctx));
    if (!f) return {AbsRes(), frags};
    const Node& call = p_.node(p_.node_of(s0.head()));
    std::vector<Stack> popped = pops(s0, frags);

    if (p_.node(*f).name == node.name) {
      VisitedSet::Scoped guard(visited_, here);
      AbsRes r;
      FragmentSet acc = frags;
      bool any = false;
      for (Stack t : popped) {
        Out o = eval(t, frags, pi, call.children[1]);
        r = r.unite(o.r);
        acc = any ? acc.unite(o.s) : o.s;
        any = true;
      }
      return {parent(std::move(r), site, s0), acc};
    }

    AbsRes r1;
    FragmentSet s1 = frags;
    {
      std::optional<VisitedSet::Scoped> guard;
      if (cfg_.strict_var_visited) guard.emplace(visited_, here);
      bool any = false;
      for (Stack t : popped) {
        Out o = eval(t, frags, pi, call.children[0]);
        r1 = r1.unite(o.r);
        s1 = any ? s1.unite(o.s) : o.s;
        any = true;
      }
    }
    Label expected = label(*f);
    std::vector<Fn> callers;
    for (const Fn& fn : functions(r1)) {
      if (fn.fun == expected && std::find(callers.begin(), callers.end(), fn) == callers.end()) callers.push_back(fn);
    }
    VisitedSet::Scoped guard(visited_, {site, s0, extended_ ? frags : s1});
    AbsRes r2;
    FragmentSet s2 = s1;
    bool any = false;
    for (const Fn& fn : callers) {
      Out o = var(fn.stack, s1, pi, n, fn.fun);
      r2 = r2.unite(o.r);
      s2 = any ? s2.unite(o.s) : o.s;
      any = true;
    }
    return {parent(std::move(r2), site, s0), s2};
  }

  Out app(Stack s, const FragmentSet& frags, const PathCond& pi, NodeId n) {
    const Node& node = p_.node(n);
    Label l = *node.label;
    Site site = Site::app(l);
    VisitedSet::Entry here{site, s, frags};
    if (visited_.contains(here)) return stub(site, s, frags);

    Out f;
    {
      VisitedSet::Scoped guard(visited_, here);
      f = eval(s, frags, pi, node.children[0]);
    }
    Stack sk = push_frame_k(pool_, l, s, cfg_.k);
    FragmentSet s1 = f.s.insert(push_frame_k(pool_, l, s, frag_len_));
    VisitedSet::Entry next{site, s, s1};
    if (visited_.contains(next)) return stub(site, s, s1);

    std::vector<Label> bodies;
    for (const Fn& fn : functions(f.r)) {
      if (std::find(bodies.begin(), bodies.end(), fn.fun) == bodies.end()) bodies.push_back(fn.fun);
    }
    std::sort(bodies.begin(), bodies.end());
    VisitedSet::Scoped guard(visited_, next);
    AbsRes r2;
    FragmentSet s2 = s1;
    bool any = false;
    for (Label b : bodies) {
      Out o = eval(sk, s1, pi, p_.node(p_.node_of(b)).children[0]);
      r2 = r2.unite(o.r);
      s2 = any ? s2.unite(o.s) : o.s;
      any = true;
    }
    return {parent(std::move(r2), site, s), s2};
  }

  const Program& p_;
  StackPool& pool_;
  const AnalyzeConfig& cfg_;
  bool extended_;
  std::size_t frag_len_;
  VisitedSet visited_;
  AnalysisStats stats_;
  std::map<NodeId, AbsRes> asserts_;
  std::vector<BranchRecord> branches_;
  std::unordered_map<std::size_t, std::vector<std::pair<AbsRes, std::vector<Fn>>>> fn_cache_;
};

AnalysisResult run_engine(const Program& program, StackPool& pool, const AnalyzeConfig& config, bool extended) {
  if (config.k < 1) throw std::invalid_argument("k must be at least 1");
  AnalysisResult out;
  run_with_large_stack([&] { out = Engine(program, pool, config, extended).run(); });
  return out;
}

// ---------------------------------------------------------------------------
// Single path
// ---------------------------------------------------------------------------

struct Outcome {
  Atom value;
  FragmentSet s;
};

class SinglePath {
 public:
  SinglePath(const Program& p, StackPool& pool, std::size_t k, std::uint64_t budget, std::size_t frag_len)
      : p_(p), pool_(pool), k_(k), frag_len_(frag_len), budget_(budget) {}

  SinglePathResult run() {
    SinglePathResult out;
    for (auto& o : eval(pool_.empty(), FragmentSet(), p_.root())) out.outcomes.push_back({o.value, o.s});
    out.budget_exhausted = exhausted_;
    out.nodes = nodes_;
    return out;
  }

 private:
  static void add(std::vector<Outcome>& out, Outcome o) {
    for (const auto& x : out) {
      if (equal(x.value, o.value) && x.s == o.s) return;
    }
    out.push_back(std::move(o));
  }

  bool tick() {
    if (++nodes_ > budget_) {
      exhausted_ = true;
      return false;
    }
    return true;
  }

  std::vector<Outcome> eval(Stack s, const FragmentSet& frags, NodeId n) {
    if (!tick()) return {};
    const Node& node = p_.node(n);
    switch (node.kind) {
      case NodeKind::Function: return {{fun_atom(*node.label, s), frags}};
      case NodeKind::IntLit: return {{int_atom(node.int_value), frags}};
      case NodeKind::BoolLit: return {{bool_atom(node.bool_value), frags}};
      case NodeKind::Variable: return var(s, frags, n, *node.label);
      case NodeKind::Application: {
        VisitedSet::Entry goal{Site::app(*node.label), s, frags};
        if (path_.contains(goal)) return {};
        VisitedSet::Scoped guard(path_, goal);
        std::vector<Outcome> out;
        Stack sk = push_frame_k(pool_, *node.label, s, k_);
        for (auto& f : eval(s, frags, node.children[0])) {
          if (f.value->kind != AtomKind::Fun) continue;
          NodeId body = p_.node(p_.node_of(f.value->fun)).children[0];
          for (auto& o : eval(sk, f.s.insert(push_frame_k(pool_, *node.label, s, frag_len_)), body)) add(out, std::move(o));
        }
        return out;
      }
      default: throw EvalError(EvalError::Kind::Unsupported, "unsupported in this semantics");
    }
  }

  std::vector<Outcome> var(Stack s0, const FragmentSet& frags, NodeId n, Label ctx) {
    const Node& node = p_.node(n);
    VisitedSet::Entry goal{Site::var(node.name, ctx), s0, frags};
    if (s0.empty() || path_.contains(goal)) return {};
    VisitedSet::Scoped guard(path_, goal);
    auto f = p_.my_fun(p_.node_of(ctx));
    if (!f) return {};
    const Node& call = p_.node(p_.node_of(s0.head()));
    std::vector<Outcome> out;
    for (Stack t : stitch(pool_, s0, frags, k_)) {
      if (p_.node(*f).name == node.name) {
        for (auto& o : eval(t, frags, call.children[1])) add(out, std::move(o));
        continue;
      }
      Label expected = *p_.node(*f).label;
      for (auto& c : eval(t, frags, call.children[0])) {
        if (c.value->kind != AtomKind::Fun || c.value->fun != expected) continue;
        for (auto& o : var(c.value->stack, c.s, n, expected)) add(out, std::move(o));
      }
    }
    return out;
  }

  const Program& p_;
  StackPool& pool_;
  std::size_t k_;
  std::size_t frag_len_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  bool exhausted_ = false;
  VisitedSet path_;
};

}  // namespace

AnalysisResult analyze_all_paths_core(const Program& program, StackPool& pool, const AnalyzeConfig& config) {
  require_core(program);
  return run_engine(program, pool, config, false);
}

AnalysisResult analyze(const Program& program, StackPool& pool, const AnalyzeConfig& config) {
  return run_engine(program, pool, config, true);
}

SinglePathResult analyze_single_path(const Program& program, StackPool& pool, std::size_t k, std::uint64_t budget,
                                     std::optional<std::size_t> fragment_len) {
  require_core(program);
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  SinglePathResult out;
  run_with_large_stack([&] { out = SinglePath(program, pool, k, budget, fragment_len.value_or(k + 1)).run(); });
  return out;
}

}  // namespace pdemand
