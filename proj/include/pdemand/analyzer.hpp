#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pdemand/abs.hpp"
#include "pdemand/resval.hpp"
#include "pdemand/stack.hpp"
#include "pdemand/syntax.hpp"

namespace pdemand {

struct AnalyzeConfig {
  std::size_t k = 2;
  std::size_t eval_depth = 3;
  std::optional<SolverConfig> solver;
  std::uint64_t node_budget = 1'000'000;
  /// Also guard the function-position premise of Var Non-Local with the
  /// visited set.
  bool strict_var_visited = false;
  /// Length of the fragments recorded in S at each call. The core analyses
  /// default to k+1, which lets a pop recover the frame truncation dropped,
  /// so a concrete closure shows up with exactly its k-truncated stack. The
  /// extended analysis defaults to k; its stacks are then prefixes of the
  /// concrete ones, which is coarser but much cheaper on recursive programs.
  std::optional<std::size_t> fragment_len;
};

/// Thrown when an analysis exceeds its node budget.
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(std::uint64_t nodes);
  std::uint64_t nodes() const { return nodes_; }

 private:
  std::uint64_t nodes_;
};

struct AnalysisStats {
  std::uint64_t nodes = 0;
  std::uint64_t stubs = 0;
  /// Var rule firings that took a popped stack longer than the remnant,
  /// i.e. that gained a frame from a fragment.
  std::uint64_t stitched_pops = 0;
  std::uint64_t solver_queries = 0;
  /// Judgements whose output fragment set did not include the input one.
  std::uint64_t monotonicity_violations = 0;
  std::uint64_t judgements = 0;
};

/// One evaluation of a conditional: where, and which branches ran.
struct BranchRecord {
  NodeId node;
  Stack stack;
  bool can_true = false;
  bool can_false = false;
};

struct AnalysisResult {
  AbsRes result;
  FragmentSet fragments;
  /// Union of the bound results seen at each letassert.
  std::map<NodeId, AbsRes> asserts;
  std::vector<BranchRecord> branches;
  AnalysisStats stats;
};

/// Core all-paths analysis: sets of function atoms, cycles pruned to the
/// empty set. Throws EvalError(Unsupported) outside the core language.
AnalysisResult analyze_all_paths_core(const Program& program, StackPool& pool, const AnalyzeConfig& config = {});

/// Extended all-paths analysis with parent labels, stubs and path
/// conditions.
AnalysisResult analyze(const Program& program, StackPool& pool, const AnalyzeConfig& config = {});

/// A derivable conclusion: the value (a function or literal atom) and the
/// fragment set it was derived with.
struct SinglePathOutcome {
  Atom value;
  FragmentSet fragments;
};

struct SinglePathResult {
  std::vector<SinglePathOutcome> outcomes;
  bool budget_exhausted = false;
  std::uint64_t nodes = 0;
};

/// Exhaustive search over single-path derivations with an occurs check on
/// repeated goals along a path. Core language only.
SinglePathResult analyze_single_path(const Program& program, StackPool& pool, std::size_t k,
                                     std::uint64_t budget = 1'000'000,
                                     std::optional<std::size_t> fragment_len = std::nullopt);

}  // namespace pdemand
