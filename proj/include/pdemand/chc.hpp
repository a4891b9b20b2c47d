#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdemand/abs.hpp"
#include "pdemand/resval.hpp"
#include "pdemand/syntax.hpp"

namespace pdemand {

/// Raised for results that have no clause encoding (records, projections)
/// and for sort conflicts.
class ChcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Sort { Int, Bool };

/// X_pred(x_var) in a clause body.
struct PredApp {
  std::size_t pred = 0;
  std::size_t var = 0;
};

/// Head argument: a clause variable, a literal, or `x_lhs op x_rhs`.
struct Term {
  enum class Kind { Var, Int, Bool, Op };
  Kind kind = Kind::Var;
  std::size_t var = 0;
  BigInt int_value;
  bool bool_value = false;
  BinOp op = BinOp::Add;
  std::size_t lhs = 0;
  std::size_t rhs = 0;
};

/// body /\ guards => X_head(head_term), all variables universally bound.
/// Variables are numbered per clause, 0..var_count-1.
struct Clause {
  std::vector<PredApp> body;
  /// x_var = b, from path conditions.
  std::vector<std::pair<std::size_t, bool>> guards;
  std::size_t head = 0;
  Term head_term;
  std::size_t var_count = 0;
};

struct ChcSystem {
  std::size_t root = 0;
  std::vector<Clause> clauses;
  /// One per predicate.
  std::vector<Sort> sorts;
  /// What each predicate stands for, for diagnostics.
  std::vector<std::string> origins;
  /// Predicates of parent labels, shared by the stubs pointing at them.
  std::vector<std::pair<ParentKey, std::size_t>> parent_preds;
};

/// Clauses whose least model at `root` is Eval(r).
ChcSystem to_chc(const AbsRes& r);

/// The protected query `X_pred(q) /\ constraint => false`; `constraint` is
/// SMT-LIB text over the variable `q`.
struct Query {
  std::size_t pred = 0;
  std::string constraint;
};

std::string emit_smtlib(const ChcSystem& system, const std::optional<Query>& query = std::nullopt);

enum class Verdict { Verified, RefutedOrUnknown, SolverUnavailable, Timeout };
std::string_view to_string(Verdict v);

struct SolveResult {
  Verdict verdict = Verdict::SolverUnavailable;
  std::string detail;
  double millis = 0;
};

/// Runs the solver on the emitted text. sat of the protected system means
/// the property holds.
SolveResult solve(const ChcSystem& system, const std::optional<Query>& query, const SolverConfig& solver);

/// Solver from PDEMAND_SOLVER, if set.
std::optional<SolverConfig> solver_from_env();

struct VerifyConfig {
  std::optional<SolverConfig> solver;
  /// Depth of the bounded fallback when no solver is configured.
  std::size_t eval_depth = 4;
};

/// The letassert predicate as SMT-LIB text over `var`; throws ChcError for
/// constructs it cannot express.
std::string predicate_to_smt(const Program& program, NodeId letassert, const std::string& var);

/// Checks the predicate of `letassert` against the analysis result of its
/// bound expression.
SolveResult verify_letassert(const AbsRes& r, const Program& program, NodeId letassert, const VerifyConfig& config);

}  // namespace pdemand
