#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdemand/stack.hpp"
#include "pdemand/syntax.hpp"

namespace pdemand {

// ---------------------------------------------------------------------------
// Lazy results of the demand interpreter
// ---------------------------------------------------------------------------

enum class ResKind { Fun, Int, Bool, Op, Record, Proj, Inspect };

struct ResNode;
using ResVal = std::shared_ptr<const ResNode>;

/// Children by kind: Op [lhs, rhs]; Record one per field; Proj and
/// Inspect [record]. `name` is the projected or inspected field.
struct ResNode {
  ResKind kind = ResKind::Int;
  Label fun;
  Stack stack;
  BigInt int_value;
  bool bool_value = false;
  BinOp op = BinOp::Add;
  std::vector<ResVal> children;
  std::vector<std::string> fields;
  std::string name;
};

ResVal make_fun(Label fun, Stack stack);
ResVal make_int(BigInt n);
ResVal make_bool(bool b);
ResVal make_op(ResVal lhs, BinOp op, ResVal rhs);
ResVal make_record(std::vector<std::string> fields, std::vector<ResVal> values);
ResVal make_proj(ResVal record, std::string field);
ResVal make_inspect(std::string field, ResVal record);

/// Residuals as parenthesized expressions, functions as `<fun@L [stack]>`.
std::string render(const ResVal& r);

// ---------------------------------------------------------------------------
// Forced values
// ---------------------------------------------------------------------------

struct Value {
  enum class Kind { Int, Bool, Fun, Record };
  Kind kind = Kind::Int;
  BigInt int_value;
  bool bool_value = false;
  Label fun;
  std::vector<std::pair<std::string, Value>> fields;

  static Value of_int(BigInt n);
  static Value of_bool(bool b);
  static Value of_fun(Label l);
  static Value of_record(std::vector<std::pair<std::string, Value>> fields);

  const Value* field(const std::string& name) const;

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator<(const Value& a, const Value& b);
};

/// `24`, `true`, `<fun@3>`, `{hd = 8; tl = {}}`
std::string render(const Value& v);

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class EvalError : public std::runtime_error {
 public:
  enum class Kind { Stuck, FuelExhausted, DepthExceeded, TypeMismatch, Unsupported };
  EvalError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }
  /// Fuel or depth ran out; the program may diverge.
  bool possible_divergence() const { return kind_ == Kind::FuelExhausted || kind_ == Kind::DepthExceeded; }

 private:
  Kind kind_;
};

/// Applies a binary operator to forced operands; throws TypeMismatch.
Value apply_op(BinOp op, const Value& lhs, const Value& rhs);

/// Reduces residual operators, projections and inspections. Records are
/// reduced field-wise; functions drop their stack.
Value force(const ResVal& r);

/// force with a cache keyed by result identity.
class ForceCache {
 public:
  Value force(const ResVal& r);
  std::size_t hits() const { return hits_; }

 private:
  std::unordered_map<const ResNode*, std::pair<ResVal, Value>> memo_;
  std::size_t hits_ = 0;
};

/// Head-normal form: strips residual projections/inspections/operators
/// until a function, literal or record literal remains. Function stacks
/// are kept.
ResVal whnf(const ResVal& r);

}  // namespace pdemand
