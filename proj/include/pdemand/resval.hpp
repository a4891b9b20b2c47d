#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pdemand/abs.hpp"
#include "pdemand/value.hpp"

namespace pdemand {

/// A value produced by abs_eval. Unlike Value, functions keep the stack
/// they were defined at, because the analysis needs it to continue.
struct AbsValue {
  enum class Kind { Int, Bool, Fun, Record };
  Kind kind = Kind::Int;
  BigInt int_value;
  bool bool_value = false;
  Label fun;
  Stack stack;
  std::vector<std::pair<std::string, AbsValue>> fields;

  static AbsValue of_int(BigInt n);
  static AbsValue of_bool(bool b);
  static AbsValue of_fun(Label l, Stack s);

  const AbsValue* field(const std::string& name) const;

  friend bool operator==(const AbsValue& a, const AbsValue& b);
  friend bool operator<(const AbsValue& a, const AbsValue& b);
};

/// Drops the stacks inside functions.
Value to_value(const AbsValue& v);
std::string render(const AbsValue& v);

/// Finite part of an Eval set plus a flag for "and possibly anything else".
struct ConcSet {
  std::set<AbsValue> values;
  bool widened = false;
  /// A size cap cut some values; implies widened. Without it, a deeper
  /// evaluation only ever adds values.
  bool capped = false;

  std::set<Value> plain() const;
  /// Membership up to function stacks; a widened set contains everything.
  bool admits(const Value& v) const;
};

struct AbsEvalOptions {
  /// Nesting of path-condition evaluations; each guard is evaluated at the
  /// full top-level depth with one less nesting. Defaults to the depth.
  std::optional<std::size_t> guard_nesting;
  /// Throw EvalError(TypeMismatch) on ill-typed combinations instead of
  /// dropping them.
  bool strict = false;
  /// Sets larger than this are cut and marked widened.
  std::size_t value_cap = 4096;
  /// Operator and record combinations larger than this widen.
  std::size_t product_cap = 1 << 16;
};

/// Bounded Eval of an analysis result: each stub may be unrolled `depth`
/// times along any path; stubs with no parent or no budget left widen.
ConcSet abs_eval(const AbsRes& r, std::size_t depth, const AbsEvalOptions& options = {});

/// External CHC solver invocation.
struct SolverConfig {
  std::string path;
  unsigned timeout_ms = 10000;
};

struct Feasibility {
  bool can_true = false;
  bool can_false = false;
  /// Solver queries issued while refining.
  std::size_t solver_queries = 0;
};

/// Which branches of a conditional may run: the booleans in
/// Eval(pi |- r_cond) at `depth`, both when that set is widened. A solver,
/// when given, can drop a boolean that only came in through widening.
Feasibility branch_feasibility(const AbsRes& r_cond, const PathCond& pi, std::size_t depth,
                               const std::optional<SolverConfig>& solver = std::nullopt);

/// Per-rule rewrite counts from the last simplify call.
struct SimplifyStats {
  std::size_t passes = 0;
  std::size_t rewrites = 0;
  std::size_t folded = 0;
  std::size_t unrolled = 0;
  std::size_t distributed = 0;
  std::size_t dropped_labels = 0;
  bool capped = false;
};

/// Term-rewriting simplifier, innermost first, to a fixpoint.
AbsRes simplify(const AbsRes& r, SimplifyStats* stats = nullptr);

}  // namespace pdemand
