#include <doctest.h>

#include <regex>

#include "oracles.hpp"
#include "pdemand/analyzer.hpp"
#include "pdemand/render.hpp"

using namespace pdemand;

namespace {

AbsRes one(Atom a) { return AbsRes::single(std::move(a)); }
AbsRes ints(std::initializer_list<int> ns) {
  std::vector<Atom> v;
  for (int n : ns) v.push_back(int_atom(BigInt(n)));
  return AbsRes(std::move(v));
}

std::size_t count(const std::string& text, const std::regex& re) {
  return std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator());
}

const std::regex kNode(R"(^  n\d+ \[)", std::regex::multiline);
const std::regex kEdge(R"(n\d+ -> n\d+)");
const std::regex kBack(R"(n\d+ -> n\d+ \[style=dashed)");

}  // namespace

TEST_SUITE("render") {
  TEST_CASE("a literal is one node") {
    std::string dot = render_dot(ints({5}));
    CHECK(dot.rfind("digraph result {", 0) == 0);
    CHECK(count(dot, kNode) == 1);
    CHECK(count(dot, kEdge) == 0);
  }

  TEST_CASE("an operator has two children") {
    std::string dot = render_dot(one(op_atom(ints({1}), BinOp::Add, ints({2}))));
    CHECK(count(dot, kNode) == 3);
    CHECK(count(dot, kEdge) == 2);
    CHECK(count(dot, kBack) == 0);
  }

  TEST_CASE("tree layout") {
    AbsRes r = one(op_atom(ints({1}), BinOp::Add, ints({2})));
    CHECK(render_tree(r) == "op +\n  lhs:\n    1\n  rhs:\n    2\n");
    CHECK(render_tree(AbsRes()) == "{}\n");
  }

  TEST_CASE("corpus: json roundtrip and stable dot") {
    for (const auto& e : oracle::corpus()) {
      INFO(e.name);
      StackPool pool;
      AbsRes r = analyze(e.program, pool).result;
      std::string json = render_json(r);
      StackPool other;
      AbsRes back = parse_result_json(json, other);
      CHECK(render_json(back) == json);
      CHECK(render_dot(back) == render_dot(r));
      CHECK(render_tree(back) == render_tree(r));
      CHECK(render_dot(r) == render_dot(r));
    }
  }

  TEST_CASE("malformed json is rejected") {
    StackPool pool;
    CHECK_THROWS(parse_result_json("[{\"kind\":\"nope\"}]", pool));
    CHECK_THROWS(parse_result_json("{", pool));
  }

  TEST_CASE("recurrence draws a dashed cycle through the addition") {
    StackPool pool;
    AnalysisResult a = analyze(oracle::load("fig17"), pool);
    REQUIRE_FALSE(a.asserts.empty());
    std::string dot = render_dot(a.asserts.begin()->second);
    CHECK(count(dot, kBack) >= 1);
    CHECK(dot.find("label=\"+\"") != std::string::npos);
    CHECK(dot.find("style=dashed") != std::string::npos);
  }
}
