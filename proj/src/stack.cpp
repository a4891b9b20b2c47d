#include "pdemand/stack.hpp"

#include <sstream>

namespace pdemand {

std::vector<Label> Stack::labels() const {
  std::vector<Label> out;
  out.reserve(size());
  for (const StackNode* n = node_; n; n = n->tail) out.push_back(n->head);
  return out;
}

bool Stack::starts_with(Stack prefix) const {
  if (prefix.size() > size()) return false;
  const StackNode* a = node_;
  const StackNode* b = prefix.node_;
  while (b) {
    if (a->head != b->head) return false;
    a = a->tail;
    b = b->tail;
  }
  return true;
}

std::strong_ordering operator<=>(Stack a, Stack b) {
  const StackNode* x = a.node_;
  const StackNode* y = b.node_;
  while (x != y) {
    if (!x) return std::strong_ordering::less;
    if (!y) return std::strong_ordering::greater;
    if (auto c = x->head <=> y->head; c != 0) return c;
    x = x->tail;
    y = y->tail;
  }
  return std::strong_ordering::equal;
}

std::string to_string(Stack s) {
  std::ostringstream out;
  out << '[';
  bool first = true;
  for (const StackNode* n = s.node(); n; n = n->tail) {
    if (!first) out << ',';
    first = false;
    out << n->head.id;
  }
  out << ']';
  return out.str();
}

Stack StackPool::push(Label head, Stack tail) {
  StackNode probe;
  probe.head = head;
  probe.tail = tail.node();
  probe.size = tail.size() + 1;
  // boost-style mix; good enough spread for the unordered_set
  std::size_t h = tail.hash();
  h ^= std::hash<std::uint32_t>{}(head.id) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  probe.hash = h;
  if (auto it = index_.find(&probe); it != index_.end()) return Stack(*it);
  nodes_.push_back(probe);
  const StackNode* node = &nodes_.back();
  index_.insert(node);
  return Stack(node);
}

Stack StackPool::from(const std::vector<Label>& labels) {
  Stack s;
  for (auto it = labels.rbegin(); it != labels.rend(); ++it) s = push(*it, s);
  return s;
}

Stack StackPool::truncate(Stack s, std::size_t k) {
  if (s.size() <= k) return s;
  auto ls = s.labels();
  ls.resize(k);
  return from(ls);
}

Stack StackPool::concat(Stack front, Stack back) {
  if (front.empty()) return back;
  auto ls = front.labels();
  Stack s = back;
  for (auto it = ls.rbegin(); it != ls.rend(); ++it) s = push(*it, s);
  return s;
}

Stack StackPool::drop(Stack s, std::size_t n) {
  while (n-- > 0 && !s.empty()) s = s.tail();
  return s;
}

}  // namespace pdemand
