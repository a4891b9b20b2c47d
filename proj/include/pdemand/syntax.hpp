#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdemand/bigint.hpp"

namespace pdemand {

/// Program point label. Only applications, functions and variable
/// occurrences carry one; ids are dense and assigned in pre-order.
struct Label {
  std::uint32_t id = 0;
  friend auto operator<=>(const Label&, const Label&) = default;
};

/// Index of a node in a Program's node table. Every node has one,
/// labeled or not.
struct NodeId {
  std::uint32_t index = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

enum class NodeKind {
  Application,
  Function,
  Variable,
  IntLit,
  BoolLit,
  BinaryOp,
  Conditional,
  Record,
  Projection,
  Inspection,
  LetAssert,
};

enum class BinOp { Add, Sub, Eq, Lt, Le, Ge, And, Or, Xor };

std::string_view to_string(NodeKind kind);
std::string_view to_string(BinOp op);

/// A node of the labeled AST.
///
/// Children by kind:
///   Application  [function, argument]
///   Function     [body]            name = binder
///   Variable     []                name = variable
///   BinaryOp     [lhs, rhs]        op
///   Conditional  [guard, then, else]
///   Record       one per field     fields = names, same order
///   Projection   [record]          name = field
///   Inspection   [record]          name = field
///   LetAssert    [bound, predicate] name = binder
struct Node {
  NodeKind kind = NodeKind::IntLit;
  std::vector<NodeId> children;
  std::optional<Label> label;
  std::string name;
  std::vector<std::string> fields;
  BinOp op = BinOp::Add;
  BigInt int_value;
  bool bool_value = false;
  std::optional<NodeId> parent;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Raised for queries about labels or nodes that do not exist or have the
/// wrong kind.
class ProgramQueryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An immutable, validated, uniquely labeled program.
class Program {
 public:
  NodeId root() const { return root_; }
  const Node& node(NodeId id) const { return nodes_.at(id.index); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t label_count() const { return label_index_.size(); }

  NodeId node_of(Label label) const;
  bool has_label(Label label) const { return label.id < label_index_.size(); }

  /// Nearest function node strictly enclosing the node.
  std::optional<NodeId> my_fun(NodeId id) const { return myfun_index_.at(id.index); }
  /// Binder node (Function or LetAssert) of a variable occurrence.
  NodeId binder_of(NodeId var) const;
  /// Number of non-binding functions between an occurrence and its
  /// binder; absent for letassert-bound occurrences.
  std::optional<std::size_t> depth_of(NodeId var) const;

  /// Functions, applications, variables and int/bool literals only.
  bool is_core() const { return core_; }

  /// Renders a node id the way dump-ast and traces do: the label id for
  /// labeled nodes, `n<index>` otherwise.
  std::string node_tag(NodeId id) const;

 private:
  friend Program parse_program(std::string_view text);

  std::vector<Node> nodes_;
  NodeId root_;
  std::vector<NodeId> label_index_;
  std::vector<std::optional<NodeId>> myfun_index_;
  std::vector<std::optional<NodeId>> binder_index_;
  std::vector<std::optional<std::size_t>> depth_index_;
  bool core_ = true;
};

Program parse_program(std::string_view text);

std::optional<Label> my_fun(const Program& program, Label label);
std::size_t lexical_depth(const Program& program, Label label);

/// Fully parenthesized source text; parses back to an identical AST.
std::string pretty_print(const Program& program);
std::string pretty_print(const Program& program, NodeId id);

/// One node per line: `tag<TAB>kind<TAB>child-tags`.
std::string dump_ast(const Program& program);

}  // namespace pdemand

template <>
struct std::hash<pdemand::Label> {
  std::size_t operator()(pdemand::Label l) const noexcept { return std::hash<std::uint32_t>{}(l.id); }
};

template <>
struct std::hash<pdemand::NodeId> {
  std::size_t operator()(pdemand::NodeId n) const noexcept { return std::hash<std::uint32_t>{}(n.index); }
};
