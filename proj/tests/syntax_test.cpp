#include <doctest.h>

#include "oracles.hpp"
#include "pdemand/syntax.hpp"

using namespace pdemand;

namespace {

NodeId find_var(const Program& p, const std::string& name, int nth = 0) {
  for (std::uint32_t i = 0; i < p.node_count(); ++i) {
    const Node& n = p.node(NodeId{i});
    if (n.kind == NodeKind::Variable && n.name == name && nth-- == 0) return NodeId{i};
  }
  FAIL("no variable " << name);
  return NodeId{};
}

NodeId find_fun(const Program& p, const std::string& binder) {
  for (std::uint32_t i = 0; i < p.node_count(); ++i) {
    const Node& n = p.node(NodeId{i});
    if (n.kind == NodeKind::Function && n.name == binder) return NodeId{i};
  }
  FAIL("no function " << binder);
  return NodeId{};
}

}  // namespace

TEST_SUITE("syntax") {
  TEST_CASE("smallest closed program") {
    Program p = parse_program("fun x -> x");
    CHECK(p.node_count() == 2);
    CHECK(p.label_count() == 2);
    CHECK(p.node(p.root()).kind == NodeKind::Function);
    CHECK(p.is_core());
  }

  TEST_CASE("constant function term has seven labels") {
    // two functions, two applications, the variable x, and two unlabeled literals
    Program p = parse_program("((fun x -> fun y -> x) 1) 2");
    CHECK(p.label_count() == 5);
    CHECK(p.node_count() == 7);
    const Node& root = p.node(p.root());
    REQUIRE(root.kind == NodeKind::Application);
    const Node& inner = p.node(root.children[0]);
    REQUIRE(inner.kind == NodeKind::Application);
    CHECK(p.node(inner.children[0]).kind == NodeKind::Function);
    CHECK(p.node(root.children[1]).int_value == 2);
  }

  TEST_CASE("labels are deterministic") {
    std::string text = oracle::read_file(oracle::corpus_dir() + "/map.pd");
    CHECK(dump_ast(parse_program(text)) == dump_ast(parse_program(text)));
  }

  TEST_CASE("unbound variable is rejected") {
    CHECK_THROWS_AS(parse_program("fun x -> y"), ParseError);
  }

  TEST_CASE("duplicate binders are rejected") {
    CHECK_THROWS_AS(parse_program("(fun x -> x) (fun x -> x)"), ParseError);
  }

  TEST_CASE("duplicate record field is rejected") {
    CHECK_THROWS_AS(parse_program("{ a = 1; a = 2 }"), ParseError);
  }

  TEST_CASE("syntax errors carry a position") {
    try {
      parse_program("fun x ->\n  (x");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  TEST_CASE("my_fun") {
    Program p = parse_program("fun x -> x");
    CHECK(p.my_fun(find_var(p, "x")) == p.root());
    CHECK_FALSE(p.my_fun(p.root()).has_value());

    Program q = parse_program("((fun x -> fun y -> x) 1) 2");
    CHECK(q.my_fun(find_var(q, "x")) == find_fun(q, "y"));
  }

  TEST_CASE("lexical depth") {
    Program p = parse_program("fun x -> x");
    CHECK(p.depth_of(find_var(p, "x")) == 0u);
    Program q = parse_program("fun x -> fun y -> (x y)");
    CHECK(q.depth_of(find_var(q, "x")) == 1u);
    CHECK(q.depth_of(find_var(q, "y")) == 0u);
    Program r = parse_program("((fun x -> fun y -> x) 1) 2");
    CHECK(r.depth_of(find_var(r, "x")) == 1u);
    CHECK(lexical_depth(r, *r.node(find_var(r, "x")).label) == 1u);
  }

  TEST_CASE("let and letassert sugar") {
    Program p = parse_program("let a = 1 in a + 2");
    const Node& root = p.node(p.root());
    REQUIRE(root.kind == NodeKind::Application);
    CHECK(p.node(root.children[0]).kind == NodeKind::Function);
    CHECK(p.node(root.children[0]).name == "a");

    Program q = parse_program("letassert r = 3 in r >= 2");
    CHECK(q.node(q.root()).kind == NodeKind::LetAssert);
    CHECK(q.node(q.root()).name == "r");
    CHECK_FALSE(q.is_core());
  }

  TEST_CASE("operators and precedence") {
    Program p = parse_program("1 + 2 - 3 < 4 and true xor false");
    CHECK(p.node(p.root()).kind == NodeKind::BinaryOp);
    CHECK(p.node_count() > 6);
    CHECK(pretty_print(parse_program(pretty_print(p))) == pretty_print(p));
  }

  TEST_CASE("comments are skipped") {
    Program p = parse_program("# leading comment\nfun x -> x # trailing\n");
    CHECK(p.node_count() == 2);
  }

  TEST_CASE("corpus: print then parse is the identity") {
    for (const auto& e : oracle::corpus()) {
      INFO(e.name);
      Program again = parse_program(pretty_print(e.program));
      CHECK(dump_ast(again) == dump_ast(e.program));
      CHECK(pretty_print(again) == pretty_print(e.program));
    }
  }

  TEST_CASE("corpus: my_fun and depth agree with a scope walk") {
    for (const auto& e : oracle::corpus()) {
      INFO(e.name);
      const Program& p = e.program;
      for (std::uint32_t i = 0; i < p.node_count(); ++i) {
        NodeId id{i};
        CHECK(p.my_fun(id) == oracle::walk_my_fun(p, id));
        if (p.node(id).kind == NodeKind::Variable) CHECK(p.depth_of(id) == oracle::walk_depth(p, id));
      }
    }
  }

  TEST_CASE("dump-ast format") {
    Program p = parse_program("fun x -> x");
    std::string text = dump_ast(p);
    CHECK(text.find("\tfun x\t") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  }
}
