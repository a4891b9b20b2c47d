#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pdemand/analyzer.hpp"
#include "pdemand/interpreters.hpp"

using namespace pdemand;

namespace {

Label L(std::uint32_t i) { return Label{i}; }

Stack st(StackPool& pool, std::initializer_list<std::uint32_t> ls) {
  std::vector<Label> v;
  for (auto l : ls) v.push_back(Label{l});
  return pool.from(v);
}

std::set<oracle::Frames> as_frames(const std::vector<Stack>& v) {
  std::set<oracle::Frames> out;
  for (Stack s : v) out.insert(oracle::frames_of(s));
  return out;
}

/// Every atom of r, pre-order.
void collect(const AbsRes& r, std::vector<Atom>& out) {
  for (const auto& a : r.atoms()) {
    out.push_back(a);
    for (const auto& p : a->parts) collect(p, out);
  }
}

}  // namespace

TEST_SUITE("fragments") {
  TEST_CASE("push_frame_k") {
    StackPool pool;
    CHECK(push_frame_k(pool, L(0), st(pool, {1, 2}), 2) == st(pool, {0, 1}));
    CHECK(push_frame_k(pool, L(0), pool.empty(), 2) == st(pool, {0}));
    CHECK(push_frame_k(pool, L(0), st(pool, {1}), 1) == st(pool, {0}));
  }

  TEST_CASE("suffixes worked example") {
    StackPool pool;
    FragmentSet s({st(pool, {2, 1}), st(pool, {2, 3}), st(pool, {1, 0})});
    CHECK(suffixes(L(2), st(pool, {1}), s) == std::vector<Stack>{st(pool, {1})});
    CHECK(suffixes(L(1), pool.empty(), s) == std::vector<Stack>{st(pool, {0})});
    FragmentSet t({st(pool, {1, 0}), st(pool, {1, 4})});
    CHECK(suffixes(L(1), pool.empty(), t) == (std::vector<Stack>{st(pool, {0}), st(pool, {4})}));
  }

  TEST_CASE("suffixes matches its definition on random fragment sets") {
    std::mt19937 rng(7);
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    StackPool pool;
    for (int c = 0; c < 1000; ++c) {
      std::size_t k = 1 + pick(3);
      std::vector<Stack> stacks;
      std::vector<oracle::Frames> raw;
      int n = pick(9);
      for (int i = 0; i < n; ++i) {
        std::size_t len = 1 + pick(static_cast<int>(k));
        std::vector<Label> ls;
        for (std::size_t j = 0; j < len; ++j) ls.push_back(L(pick(4)));
        stacks.push_back(pool.from(ls));
        raw.push_back(oracle::frames_of(stacks.back()));
      }
      FragmentSet s(stacks);
      std::uint32_t l = pick(4);
      std::vector<Label> prefix;
      for (int j = pick(static_cast<int>(k)); j > 0; --j) prefix.push_back(L(pick(4)));
      Stack p = pool.from(prefix);
      auto got = suffixes(L(l), p, s);
      CHECK(as_frames(got) == oracle::brute_suffixes(l, oracle::frames_of(p), raw));
      CHECK(std::is_sorted(got.begin(), got.end()));
      for (Stack g : got) CHECK(g.starts_with(p));
      if (k == 1) {
        // no frames gained by stitching at k = 1
        for (Stack g : got) CHECK(g.size() <= 1);
      }
    }
  }

  TEST_CASE("fragment set operations") {
    StackPool pool;
    FragmentSet a({st(pool, {1}), st(pool, {2, 1})});
    FragmentSet b = a.insert(st(pool, {3}));
    CHECK(b.includes(a));
    CHECK_FALSE(a.includes(b));
    CHECK(a.unite(b) == b);
    CHECK(a.insert(st(pool, {1})) == a);
  }
}

TEST_SUITE("analyzer") {
  TEST_CASE("identity application") {
    Program p = parse_program("(fun x -> x)(fun y -> y)");
    StackPool pool;
    auto r = analyze_all_paths_core(p, pool);
    REQUIRE(r.result.size() == 1);
    const Atom& a = r.result.atoms()[0];
    CHECK(a->kind == AtomKind::Fun);
    CHECK(p.node(p.node_of(a->fun)).name == "y");
    CHECK(a->stack.empty());

    auto sp = analyze_single_path(p, pool, 2);
    REQUIRE(sp.outcomes.size() == 1);
    CHECK(equal(sp.outcomes[0].value, a));
  }

  TEST_CASE("functions-only constant function") {
    Program p = oracle::load("fig4_core");
    StackPool pool;
    auto r = analyze_all_paths_core(p, pool);
    REQUIRE(r.result.size() == 1);
    CHECK(p.node(p.node_of(r.result.atoms()[0]->fun)).name == "one");
    auto sp = analyze_single_path(p, pool, 2);
    REQUIRE(sp.outcomes.size() == 1);
    CHECK(equal(sp.outcomes[0].value, r.result.atoms()[0]));
  }

  TEST_CASE("nested non-local lookup") {
    Program p = parse_program("((fun x -> fun y -> x)(fun z -> z))(fun w -> w)");
    StackPool pool;
    auto r = analyze_all_paths_core(p, pool);
    REQUIRE(r.result.size() == 1);
    CHECK(p.node(p.node_of(r.result.atoms()[0]->fun)).name == "z");
  }

  TEST_CASE("omega") {
    Program p = oracle::load("omega");
    StackPool pool;
    auto core = analyze_all_paths_core(p, pool);
    CHECK(core.result.empty());
    CHECK(core.stats.stubs >= 1);
    CHECK(analyze_single_path(p, pool, 2).outcomes.empty());
    auto ext = analyze(p, pool);
    AbsRes s = simplify(ext.result);
    bool single_stub = s.size() == 1 && s.atoms()[0]->kind == AtomKind::Stub;
    CHECK((s.empty() || single_stub));
  }

  TEST_CASE("operation is lazy") {
    Program p = parse_program("1 + 2");
    StackPool pool;
    auto r = analyze(p, pool);
    REQUIRE(r.result.size() == 1);
    CHECK(render_compact(r.result) == "(1 + 2)");
    CHECK(r.fragments.size() == 0);
    CHECK(r.stats.stubs == 0);
  }

  TEST_CASE("non-core programs are rejected by the core analyses") {
    StackPool pool;
    CHECK_THROWS_AS(analyze_all_paths_core(parse_program("1 + 2"), pool), EvalError);
    CHECK_THROWS_AS(analyze_single_path(parse_program("1 + 2"), pool, 2), EvalError);
  }

  TEST_CASE("recurrence for the recursive identity") {
    Program p = oracle::load("fig17");
    StackPool pool;
    auto r = analyze(p, pool);
    REQUIRE(r.asserts.size() == 1);
    AbsRes s = simplify(r.result);
    std::vector<Atom> all;
    collect(s, all);
    bool found = false;
    for (const auto& a : all) {
      if (a->kind != AtomKind::Labeled) continue;
      bool base = false, step = false;
      for (const auto& g : a->parts[0].atoms()) {
        if (g->kind != AtomKind::Guarded) continue;
        const AbsRes& v = g->parts[1];
        if (v.size() == 1 && v.atoms()[0]->kind == AtomKind::Int && v.atoms()[0]->int_value == 0) base = true;
        if (v.size() == 1 && v.atoms()[0]->kind == AtomKind::Op) {
          const Atom& op = v.atoms()[0];
          bool one = op->parts[0].size() == 1 && op->parts[0].atoms()[0]->kind == AtomKind::Int &&
                     op->parts[0].atoms()[0]->int_value == 1;
          bool stub = op->parts[1].size() == 1 && op->parts[1].atoms()[0]->kind == AtomKind::Stub &&
                      op->parts[1].atoms()[0]->key == a->key;
          if (one && stub && op->op == BinOp::Add) step = true;
        }
      }
      found = found || (base && step);
    }
    CHECK(found);
  }

  TEST_CASE("map reaches a stub under its tail") {
    Program p = oracle::load("map");
    StackPool pool;
    auto r = analyze(p, pool);
    std::vector<Atom> all;
    collect(r.result, all);
    bool record_with_stub_tail = false;
    for (const auto& a : all) {
      if (a->kind != AtomKind::Record || a->fields.size() != 2) continue;
      std::vector<Atom> tail;
      collect(a->parts[1], tail);
      for (const auto& t : tail) record_with_stub_tail = record_with_stub_tail || t->kind == AtomKind::Stub;
    }
    CHECK(record_with_stub_tail);
  }

  TEST_CASE("corpus: termination, monotonicity, determinism, closed stubs") {
    for (const auto& e : oracle::corpus()) {
      INFO(e.name);
      StackPool pool;
      AnalyzeConfig cfg;
      auto a = analyze(e.program, pool, cfg);
      auto b = analyze(e.program, pool, cfg);
      CHECK(a.result == b.result);
      CHECK(a.stats.monotonicity_violations == 0);
      CHECK(a.stats.nodes <= cfg.node_budget);
      // every stub sits under a parent with its key
      std::function<void(const AbsRes&, std::vector<ParentKey>&)> walk = [&](const AbsRes& r,
                                                                              std::vector<ParentKey>& keys) {
        for (const auto& x : r.atoms()) {
          if (x->kind == AtomKind::Stub) CHECK(std::find(keys.begin(), keys.end(), x->key) != keys.end());
          if (x->kind == AtomKind::Labeled) keys.push_back(x->key);
          for (const auto& part : x->parts) walk(part, keys);
          if (x->kind == AtomKind::Labeled) keys.pop_back();
        }
      };
      std::vector<ParentKey> keys;
      walk(a.result, keys);
      if (e.program.is_core()) {
        auto c = analyze_all_paths_core(e.program, pool, cfg);
        CHECK(c.stats.monotonicity_violations == 0);
      }
    }
  }

  TEST_CASE("corpus: concrete result is among the core analysis atoms") {
    for (const auto& e : oracle::corpus()) {
      if (!e.program.is_core() || oracle::diverges(e.name)) continue;
      INFO(e.name);
      StackPool pool;
      ResVal v = eval_demand(e.program, pool).value;
      auto r = analyze_all_paths_core(e.program, pool);
      Atom expect = v->kind == ResKind::Fun ? fun_atom(v->fun, pool.truncate(v->stack, 2))
                                            : v->kind == ResKind::Int ? int_atom(v->int_value)
                                                                      : bool_atom(v->bool_value);
      bool member = false;
      for (const auto& a : r.result.atoms()) member = member || equal(a, expect);
      CHECK(member);
    }
  }

  TEST_CASE("corpus: single-path conclusions are among all-paths atoms") {
    for (const auto& e : oracle::corpus()) {
      if (!e.program.is_core()) continue;
      INFO(e.name);
      StackPool pool;
      auto sp = analyze_single_path(e.program, pool, 2);
      auto ap = analyze_all_paths_core(e.program, pool);
      for (const auto& o : sp.outcomes) {
        bool member = false;
        for (const auto& a : ap.result.atoms()) member = member || equal(a, o.value);
        CHECK(member);
      }
    }
  }

  TEST_CASE("corpus: concrete value is admitted by the bounded evaluation of the analysis") {
    for (const auto& e : oracle::corpus()) {
      if (oracle::diverges(e.name)) continue;
      INFO(e.name);
      StackPool pool;
      Value v = force(eval_demand(e.program, pool).value);
      auto r = analyze(e.program, pool);
      bool admitted = false;
      for (std::size_t d = 0; d <= 8 && !admitted; ++d) admitted = abs_eval(r.result, d).admits(v);
      CHECK(admitted);
    }
  }

  TEST_CASE("corpus: the taken branch is never pruned") {
    // a branch ran concretely iff its first node shows up in the trace
    for (const auto& e : oracle::corpus()) {
      if (oracle::diverges(e.name)) continue;
      INFO(e.name);
      StackPool pool;
      std::ostringstream trace;
      EvalOptions o;
      o.trace = &trace;
      eval_demand(e.program, pool, o);
      std::set<std::string> seen;
      std::istringstream lines(trace.str());
      std::string line;
      while (std::getline(lines, line)) {
        std::size_t a = line.find('\t') + 1;
        std::string tag = line.substr(a, line.find('\t', a) - a);
        seen.insert(tag.substr(0, tag.find('^')));
      }
      auto r = analyze(e.program, pool);
      std::map<NodeId, std::pair<bool, bool>> allowed;
      for (const auto& b : r.branches) {
        auto& slot = allowed[b.node];
        slot.first = slot.first || b.can_true;
        slot.second = slot.second || b.can_false;
      }
      const Program& p = e.program;
      for (std::uint32_t i = 0; i < p.node_count(); ++i) {
        const Node& n = p.node(NodeId{i});
        if (n.kind != NodeKind::Conditional) continue;
        if (seen.count(p.node_tag(n.children[1]))) CHECK(allowed[NodeId{i}].first);
        if (seen.count(p.node_tag(n.children[2]))) CHECK(allowed[NodeId{i}].second);
      }
    }
  }

  TEST_CASE("node budget") {
    StackPool pool;
    AnalyzeConfig cfg;
    cfg.node_budget = 10;
    CHECK_THROWS_AS(analyze(oracle::load("map"), pool, cfg), BudgetExceeded);
    cfg.k = 0;
    CHECK_THROWS_AS(analyze(oracle::load("fig4"), pool, cfg), std::invalid_argument);
  }
}
