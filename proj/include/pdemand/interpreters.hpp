#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdemand/stack.hpp"
#include "pdemand/syntax.hpp"
#include "pdemand/value.hpp"

namespace pdemand {

/// Deliberate faults for testing the differential harness.
enum class Fault {
  None,
  /// Integer addition in the demand interpreter is off by one.
  DemandAddOffByOne,
};

struct EvalOptions {
  bool cache = false;
  /// Skip evaluating the argument in Application (the call-by-name proof shape).
  bool skip_arg = false;
  std::uint64_t fuel = 10'000'000;
  std::size_t max_depth = 200'000;
  /// One line per rule firing: `RULE<TAB>tag<TAB>stack`.
  std::ostream* trace = nullptr;
  Fault fault = Fault::None;
};

struct EvalCounters {
  std::uint64_t rule_firings = 0;
  std::uint64_t app_firings = 0;
  std::uint64_t var_local = 0;
  std::uint64_t var_nonlocal = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  /// Keys evaluated a second time while the cache was on; must stay 0.
  std::uint64_t duplicate_evaluations = 0;
  /// Recursive evaluations started by Var Non-Local to recover the
  /// calling function.
  std::uint64_t nonlocal_reevaluations = 0;
  std::uint64_t force_cache_hits = 0;
};

struct DemandResult {
  ResVal value;
  EvalCounters counters;
};

/// Pure-demand big-step evaluation from `[] ⊢ program`.
DemandResult eval_demand(const Program& program, StackPool& pool, const EvalOptions& options = {});

// --- environment / closure reference interpreter ---------------------------

struct EnvCell;
struct EnvValue;
using Env = std::shared_ptr<const EnvCell>;

struct EnvValue {
  enum class Kind { Closure, Int, Bool, Record };
  Kind kind = Kind::Int;
  Label fun;
  Env env;
  BigInt int_value;
  bool bool_value = false;
  std::vector<std::pair<std::string, std::shared_ptr<const EnvValue>>> fields;
};

/// Environment list cell; the head binds the innermost variable.
struct EnvCell {
  std::string name;
  std::shared_ptr<const EnvValue> value;
  Env next;
};

struct EnvResult {
  EnvValue value;
  EvalCounters counters;
};

EnvResult eval_env(const Program& program, const EvalOptions& options = {});

/// Closures compare by function label; everything else structurally.
Value to_value(const EnvValue& v);
/// Environment rendered innermost first: `[x -> 1, f -> <fun@0>]`.
std::string render_env(const Env& env);

// --- chaining ---------------------------------------------------------------

struct ChainResult {
  ResVal value;
  EvalCounters counters;
};

/// Core language only. Throws EvalError(Unsupported) otherwise.
ChainResult eval_chain(const Program& program, StackPool& pool, const EvalOptions& options = {});

// --- displays ---------------------------------------------------------------

struct DisplayCell;
using Display = std::shared_ptr<const DisplayCell>;

/// One frame F = (application, saved display) plus the rest of the display.
struct DisplayCell {
  Label app;
  Display saved;
  Display next;
};

/// A closure (function label plus display) or an inert literal.
struct DisplayValue {
  std::optional<Value> literal;
  Label fun;
  Display display;
};

struct DisplayResult {
  DisplayValue value;
  EvalCounters counters;
};

std::string render_display(const Display& d);
DisplayResult eval_display(const Program& program, const EvalOptions& options = {});

// --- optimized frames -------------------------------------------------------

struct OptCell;
using OptStack = std::shared_ptr<const OptCell>;

/// Frame ⟨app, fun/stack⟩: the call site and the value of the function called.
struct OptCell {
  Label app;
  Label fun;
  OptStack fun_stack;
  OptStack next;
};

struct OptResult {
  std::optional<Value> literal;
  Label fun;
  OptStack stack;
  /// Same function value with the stack reduced to its call-site labels,
  /// directly comparable with eval_demand.
  ResVal as_demand;
  EvalCounters counters;
};

OptResult eval_optimized(const Program& program, StackPool& pool, const EvalOptions& options = {});

// --- shared helpers ---------------------------------------------------------

/// Evaluates a letassert predicate with its binder bound to `bound`.
bool eval_predicate(const Program& program, NodeId letassert, const Value& bound);

/// Runs `fn` on a thread with a large stack (deep recursion in the
/// interpreters and analyses). Exceptions propagate to the caller.
void run_with_large_stack(const std::function<void()>& fn, std::size_t bytes = std::size_t(1) << 30);

}  // namespace pdemand
