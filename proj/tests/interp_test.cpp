#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "pdemand/interpreters.hpp"

using namespace pdemand;

namespace {

Value demand_value(const Program& p, EvalOptions o = {}) {
  StackPool pool;
  return force(eval_demand(p, pool, o).value);
}

std::string fib_source(int n) {
  return "let fib = fun fs -> fun n -> if n < 2 then n else fs fs (n - 1) + fs fs (n - 2) in fib fib " +
         std::to_string(n);
}

}  // namespace

TEST_SUITE("interpreters") {
  TEST_CASE("constant function under every semantics") {
    Program p = parse_program("((fun x -> fun y -> x) 1) 2");
    StackPool pool;
    auto d = eval_demand(p, pool);
    CHECK(render(d.value) == "1");
    CHECK(force(d.value) == Value::of_int(1));
    CHECK(to_value(eval_env(p).value) == Value::of_int(1));
    CHECK(force(eval_chain(p, pool).value) == Value::of_int(1));
    CHECK(eval_display(p).value.literal == Value::of_int(1));
    CHECK(eval_optimized(p, pool).literal == Value::of_int(1));
  }

  TEST_CASE("argument skipping gives the same answer") {
    Program p = parse_program("((fun x -> fun y -> x) 1) 2");
    EvalOptions o;
    o.skip_arg = true;
    CHECK(demand_value(p, o) == Value::of_int(1));
  }

  TEST_CASE("identity applied to a function") {
    Program p = parse_program("(fun x -> x) (fun y -> y)");
    StackPool pool;
    ResVal r = eval_demand(p, pool).value;
    REQUIRE(r->kind == ResKind::Fun);
    CHECK(r->stack.empty());
    CHECK(p.node(p.node_of(r->fun)).name == "y");
    ResVal c = eval_chain(p, pool).value;
    CHECK(c->fun == r->fun);
    CHECK(c->stack.empty());
  }

  TEST_CASE("nested non-local lookup") {
    Program p = parse_program("((fun x -> fun y -> x)(fun z -> z))(fun w -> w)");
    StackPool pool;
    ResVal r = eval_demand(p, pool).value;
    REQUIRE(r->kind == ResKind::Fun);
    CHECK(p.node(p.node_of(r->fun)).name == "z");
    CHECK(r->stack.empty());
    CHECK(oracle::SubstInterp().run(p) == force(r));
    CHECK(Value::of_fun(eval_display(p).value.fun) == force(r));
    CHECK(eval_optimized(p, pool).as_demand->fun == r->fun);
  }

  TEST_CASE("optimized frames never re-evaluate the caller") {
    for (const auto& e : oracle::corpus()) {
      if (!e.program.is_core() || oracle::diverges(e.name)) continue;
      INFO(e.name);
      StackPool pool;
      CHECK(eval_optimized(e.program, pool).counters.nonlocal_reevaluations == 0);
    }
  }

  TEST_CASE("factorial forces to 24") {
    Program p = oracle::load("fact4");
    StackPool pool;
    ResVal r = eval_demand(p, pool).value;
    CHECK(r->kind == ResKind::Op);
    CHECK(force(r) == Value::of_int(24));
    CHECK(to_value(eval_env(p).value) == Value::of_int(24));
  }

  TEST_CASE("map builds the incremented list") {
    Program p = oracle::load("map");
    // 1+7, 1+8, 1+9 by hand
    Value nil = Value::of_record({});
    Value expected = Value::of_record(
        {{"hd", Value::of_int(8)},
         {"tl", Value::of_record({{"hd", Value::of_int(9)},
                                  {"tl", Value::of_record({{"hd", Value::of_int(10)}, {"tl", nil}})}})}});
    CHECK(demand_value(p) == expected);
    CHECK(to_value(eval_env(p).value) == expected);
    CHECK(render(expected) == "{hd = 8; tl = {hd = 9; tl = {hd = 10; tl = {}}}}");
  }

  TEST_CASE("force") {
    CHECK(force(make_op(make_int(3), BinOp::Add, make_int(2))) == Value::of_int(5));
    CHECK(force(make_int(7)) == Value::of_int(7));
    ResVal rec = make_record({"hd", "tl"}, {make_int(1), make_record({}, {})});
    CHECK(force(make_proj(rec, "hd")) == Value::of_int(1));
    CHECK_THROWS_AS(force(make_proj(make_int(1), "hd")), EvalError);
    CHECK_THROWS_AS(force(make_op(rec, BinOp::Add, make_int(1))), EvalError);
  }

  TEST_CASE("stuck and divergent programs") {
    StackPool pool;
    try {
      eval_demand(parse_program("1 2"), pool);
      FAIL("expected stuck");
    } catch (const EvalError& e) {
      CHECK(e.kind() == EvalError::Kind::Stuck);
    }
    EvalOptions o;
    o.fuel = 1000;
    try {
      eval_demand(oracle::load("omega"), pool, o);
      FAIL("expected fuel exhaustion");
    } catch (const EvalError& e) {
      CHECK(e.possible_divergence());
    }
    CHECK_THROWS_AS(eval_env(oracle::load("omega"), o), EvalError);
  }

  TEST_CASE("extended constructs are unsupported by the core semantics") {
    Program p = parse_program("1 + 2");
    StackPool pool;
    try {
      eval_chain(p, pool);
      FAIL("expected unsupported");
    } catch (const EvalError& e) {
      CHECK(e.kind() == EvalError::Kind::Unsupported);
    }
    CHECK_THROWS_AS(eval_display(p), EvalError);
    CHECK_THROWS_AS(eval_optimized(p, pool), EvalError);
  }

  TEST_CASE("trace prints one line per rule") {
    Program p = parse_program("(fun x -> x) (fun y -> y)");
    std::ostringstream trace;
    EvalOptions o;
    o.trace = &trace;
    StackPool pool;
    auto r = eval_demand(p, pool, o);
    std::string t = trace.str();
    CHECK(static_cast<std::uint64_t>(std::count(t.begin(), t.end(), '\n')) == r.counters.rule_firings);
    CHECK(t.rfind("Application\t", 0) == 0);
  }

  TEST_CASE("corpus: demand equals the environment interpreter and substitution") {
    for (const auto& e : oracle::corpus()) {
      if (oracle::diverges(e.name)) continue;
      INFO(e.name);
      Value d = demand_value(e.program);
      CHECK(d == to_value(eval_env(e.program).value));
      CHECK(d == oracle::SubstInterp().run(e.program));
    }
  }

  TEST_CASE("corpus: core semantics agree on the result function") {
    for (const auto& e : oracle::corpus()) {
      if (!e.program.is_core() || oracle::diverges(e.name)) continue;
      INFO(e.name);
      StackPool pool;
      ResVal d = eval_demand(e.program, pool).value;
      ResVal c = eval_chain(e.program, pool).value;
      CHECK(force(c) == force(d));
      if (d->kind == ResKind::Fun) {
        CHECK(c->fun == d->fun);
        CHECK(c->stack == d->stack);
        CHECK(eval_display(e.program).value.fun == d->fun);
        auto o = eval_optimized(e.program, pool);
        CHECK(o.as_demand->fun == d->fun);
        CHECK(o.as_demand->stack == d->stack);
      } else {
        CHECK(eval_display(e.program).value.literal == force(d));
        CHECK(eval_optimized(e.program, pool).literal == force(d));
      }
    }
  }

  TEST_CASE("corpus: determinism and cache transparency") {
    for (const auto& e : oracle::corpus()) {
      if (oracle::diverges(e.name)) continue;
      INFO(e.name);
      StackPool pool;
      EvalOptions cached;
      cached.cache = true;
      auto a = eval_demand(e.program, pool);
      auto b = eval_demand(e.program, pool);
      auto c = eval_demand(e.program, pool, cached);
      CHECK(render(a.value) == render(b.value));
      CHECK(render(a.value) == render(c.value));
      CHECK(c.counters.duplicate_evaluations == 0);
    }
  }

  TEST_CASE("cache counts grow with fib input") {
    EvalOptions o;
    o.cache = true;
    StackPool pool;
    auto small = eval_demand(parse_program(fib_source(5)), pool, o);
    auto big = eval_demand(parse_program(fib_source(12)), pool, o);
    CHECK(force(small.value) == Value::of_int(5));
    CHECK(force(big.value) == Value::of_int(144));
    CHECK(big.counters.cache_hits > 0);
    CHECK(big.counters.duplicate_evaluations == 0);
  }
}
