#include <doctest.h>

#include "oracles.hpp"
#include "pdemand/analyzer.hpp"
#include "pdemand/chc.hpp"

using namespace pdemand;

namespace {

AbsRes one(Atom a) { return AbsRes::single(std::move(a)); }
AbsRes ints(std::initializer_list<int> ns) {
  std::vector<Atom> v;
  for (int n : ns) v.push_back(int_atom(BigInt(n)));
  return AbsRes(std::move(v));
}

std::optional<SolverConfig> z3() {
  std::string path = PDEMAND_Z3;
  if (path.empty()) return std::nullopt;
  return SolverConfig{path, 20000};
}

AbsRes naturals() {
  ParentKey key{Site::app(Label{4}), Stack()};
  AbsRes inner({int_atom(BigInt(0)), op_atom(ints({1}), BinOp::Add, one(stub_atom(key)))});
  return one(labeled_atom(inner, key));
}

struct Asserted {
  std::shared_ptr<StackPool> pool;
  Program program;
  NodeId node;
  AbsRes result;
};

Asserted first_assert(const std::string& name) {
  Asserted a{std::make_shared<StackPool>(), oracle::load(name), {}, {}};
  AnalysisResult r = analyze(a.program, *a.pool);
  REQUIRE_FALSE(r.asserts.empty());
  a.node = r.asserts.begin()->first;
  a.result = r.asserts.begin()->second;
  return a;
}

}  // namespace

TEST_SUITE("chc") {
  TEST_CASE("two literals give two facts and a union") {
    ChcSystem s = to_chc(ints({2, 3}));
    REQUIRE(s.sorts.size() >= 1);
    CHECK(s.sorts[s.root] == Sort::Int);
    std::size_t facts = 0;
    for (const auto& c : s.clauses) {
      if (c.body.empty() && c.head_term.kind == Term::Kind::Int) ++facts;
    }
    CHECK(facts == 2);
    auto model = oracle::saturate(s);
    CHECK(model[s.root] == std::set<AbsValue>{AbsValue::of_int(BigInt(2)), AbsValue::of_int(BigInt(3))});
  }

  TEST_CASE("least model matches exact evaluation on random results") {
    oracle::ResultGen gen(5);
    int tried = 0;
    for (int i = 0; tried < 50 && i < 1000; ++i) {
      AbsRes r = i % 2 ? gen.ints(2) : gen.bools(2);
      ConcSet c = abs_eval(r, 0);
      if (c.values.size() > 16 || c.values.empty()) continue;
      ++tried;
      ChcSystem s = to_chc(r);
      CHECK(oracle::saturate(s)[s.root] == c.values);
    }
    CHECK(tried == 50);
  }

  TEST_CASE("stubs share the predicate of their parent") {
    ChcSystem s = to_chc(naturals());
    REQUIRE(s.parent_preds.size() == 1);
    std::size_t parent = s.parent_preds[0].second;
    bool self_reference = false;
    for (const auto& c : s.clauses) {
      for (const auto& b : c.body) self_reference = self_reference || b.pred == parent;
    }
    CHECK(self_reference);
  }

  TEST_CASE("records have no encoding") {
    CHECK_THROWS_AS(to_chc(one(record_atom({"a"}, {ints({1})}))), ChcError);
    CHECK_THROWS_AS(to_chc(AbsRes({int_atom(BigInt(1)), bool_atom(true)})), ChcError);
  }

  TEST_CASE("emitted text") {
    ChcSystem s = to_chc(naturals());
    std::string a = emit_smtlib(s, Query{s.root, "(< q 0)"});
    CHECK(a == emit_smtlib(to_chc(naturals()), Query{s.root, "(< q 0)"}));
    CHECK(a.rfind("(set-logic HORN)\n", 0) == 0);
    CHECK(a.find("(< q 0)") != std::string::npos);
    CHECK(emit_smtlib(ChcSystem{}) == "(set-logic HORN)\n(check-sat)\n");
  }

  TEST_CASE("identity recurrence has a self-referential predicate") {
    Asserted a = first_assert("fig17");
    ChcSystem s = to_chc(simplify(a.result));
    REQUIRE_FALSE(s.parent_preds.empty());
    // some parent predicate depends on itself through the clauses
    std::vector<std::set<std::size_t>> uses(s.sorts.size());
    for (const auto& c : s.clauses) {
      for (const auto& b : c.body) uses[c.head].insert(b.pred);
    }
    bool recursive = false;
    for (const auto& [key, pred] : s.parent_preds) {
      std::set<std::size_t> seen;
      std::vector<std::size_t> todo(uses[pred].begin(), uses[pred].end());
      while (!todo.empty()) {
        std::size_t q = todo.back();
        todo.pop_back();
        if (!seen.insert(q).second) continue;
        todo.insert(todo.end(), uses[q].begin(), uses[q].end());
      }
      recursive = recursive || seen.count(pred);
    }
    CHECK(recursive);
  }

  TEST_CASE("bounded fallback") {
    Program p = parse_program("letassert r = 5 in r = 5");
    SolveResult v = verify_letassert(ints({5}), p, p.root(), VerifyConfig{});
    CHECK(v.verdict == Verdict::Verified);
    Program q = parse_program("letassert r = 5 in r <= 100");
    SolveResult w = verify_letassert(naturals(), q, q.root(), VerifyConfig{});
    CHECK(w.verdict == Verdict::RefutedOrUnknown);
    SolveResult x = verify_letassert(ints({5, 200}), q, q.root(), VerifyConfig{});
    CHECK(x.verdict == Verdict::RefutedOrUnknown);
    CHECK(x.detail.find("200") != std::string::npos);
  }

  TEST_CASE("solver failures") {
    ChcSystem s = to_chc(ints({2}));
    CHECK(solve(s, std::nullopt, SolverConfig{"/nonexistent/z3", 1000}).verdict == Verdict::SolverUnavailable);
    CHECK(solve(s, std::nullopt, SolverConfig{"/bin/sh", 0}).verdict == Verdict::Timeout);
  }

  TEST_CASE("z3 on small systems") {
    auto solver = z3();
    if (!solver) {
      MESSAGE("z3 not found; skipped");
      return;
    }
    ChcSystem s = to_chc(ints({2, 3}));
    CHECK(solve(s, Query{s.root, "(> q 3)"}, *solver).verdict == Verdict::Verified);
    CHECK(solve(s, Query{s.root, "(> q 2)"}, *solver).verdict == Verdict::RefutedOrUnknown);
    ChcSystem n = to_chc(naturals());
    CHECK(solve(n, Query{n.root, "(< q 0)"}, *solver).verdict == Verdict::Verified);
    CHECK(solve(n, Query{n.root, "(> q 100)"}, *solver).verdict == Verdict::RefutedOrUnknown);
  }

  TEST_CASE("z3 proves the identity assertion") {
    auto solver = z3();
    if (!solver) {
      MESSAGE("z3 not found; skipped");
      return;
    }
    Asserted a = first_assert("fig17");
    SolveResult v = verify_letassert(a.result, a.program, a.node, VerifyConfig{solver, 4});
    CHECK(v.verdict == Verdict::Verified);
  }
}
