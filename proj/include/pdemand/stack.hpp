#pragma once

#include <compare>
#include <cstddef>
#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

#include "pdemand/syntax.hpp"

namespace pdemand {

struct StackNode {
  Label head;
  const StackNode* tail = nullptr;
  std::size_t size = 0;
  std::size_t hash = 0;
};

/// Immutable call stack, head = most recent frame. Stacks come from a
/// StackPool; within one pool structural equality is pointer equality.
class Stack {
 public:
  Stack() = default;
  explicit Stack(const StackNode* node) : node_(node) {}

  bool empty() const { return node_ == nullptr; }
  std::size_t size() const { return node_ ? node_->size : 0; }
  Label head() const { return node_->head; }
  Stack tail() const { return Stack(node_->tail); }
  std::size_t hash() const { return node_ ? node_->hash : 0x9e3779b9u; }
  const StackNode* node() const { return node_; }

  std::vector<Label> labels() const;
  /// True when `prefix` is a prefix of this stack (head side).
  bool starts_with(Stack prefix) const;

  friend bool operator==(Stack a, Stack b) { return a.node_ == b.node_; }
  /// Lexicographic from the head; shorter prefix first.
  friend std::strong_ordering operator<=>(Stack a, Stack b);

 private:
  const StackNode* node_ = nullptr;
};

/// `[3,1,0]`
std::string to_string(Stack s);

/// Hash-consing arena. Not thread safe; one per session.
class StackPool {
 public:
  StackPool() = default;
  StackPool(const StackPool&) = delete;
  StackPool& operator=(const StackPool&) = delete;

  Stack empty() const { return Stack(); }
  Stack push(Label head, Stack tail);
  Stack from(const std::vector<Label>& labels);
  /// First `k` frames.
  Stack truncate(Stack s, std::size_t k);
  Stack concat(Stack front, Stack back);
  /// Drops the first `n` frames (no allocation).
  static Stack drop(Stack s, std::size_t n);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct KeyHash {
    std::size_t operator()(const StackNode* n) const noexcept { return n->hash; }
  };
  struct KeyEq {
    bool operator()(const StackNode* a, const StackNode* b) const noexcept {
      return a->head == b->head && a->tail == b->tail;
    }
  };
  std::deque<StackNode> nodes_;
  std::unordered_set<const StackNode*, KeyHash, KeyEq> index_;
};

}  // namespace pdemand

template <>
struct std::hash<pdemand::Stack> {
  std::size_t operator()(pdemand::Stack s) const noexcept { return s.hash(); }
};
