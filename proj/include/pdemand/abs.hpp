#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdemand/stack.hpp"
#include "pdemand/syntax.hpp"

namespace pdemand {

/// Where a parent label or stub was produced: an application site, or a
/// variable lookup `x^ℓ` (the context label after relabeling).
struct Site {
  enum class Kind { App, Var };
  Kind kind = Kind::App;
  Label label;
  std::string name;

  static Site app(Label l) { return Site{Kind::App, l, {}}; }
  static Site var(std::string name, Label ctx) { return Site{Kind::Var, ctx, std::move(name)}; }

  friend bool operator==(const Site&, const Site&) = default;
  friend std::strong_ordering operator<=>(const Site& a, const Site& b);
};

/// `7` for applications, `x^7` for variables.
std::string to_string(const Site& s);

/// ⟨site, Σ⟩, shared by a Labeled parent and the stubs pointing at it.
struct ParentKey {
  Site site;
  Stack stack;

  friend bool operator==(const ParentKey&, const ParentKey&) = default;
  friend std::strong_ordering operator<=>(const ParentKey& a, const ParentKey& b);
  std::size_t hash() const;
};

std::string to_string(const ParentKey& k);

enum class AtomKind { Fun, Int, Bool, Op, Record, Proj, Inspect, Labeled, Stub, Guarded };
std::string_view to_string(AtomKind k);

struct AtomNode;
using Atom = std::shared_ptr<const AtomNode>;

/// Canonically ordered, duplicate-free set of atoms.
class AbsRes {
 public:
  AbsRes() = default;
  explicit AbsRes(std::vector<Atom> atoms);
  static AbsRes single(Atom a);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }
  std::size_t hash() const { return hash_; }

  AbsRes unite(const AbsRes& other) const;

  friend bool operator==(const AbsRes& a, const AbsRes& b);
  friend std::strong_ordering operator<=>(const AbsRes& a, const AbsRes& b);

 private:
  std::vector<Atom> atoms_;
  std::size_t hash_ = 0x51ed27u;
};

/// Children by kind:
///   Op       parts = [lhs, rhs], op
///   Record   parts = one per field, fields = names
///   Proj     parts = [record], name = field
///   Inspect  parts = [record], name = field
///   Labeled  parts = [inner], key
///   Stub     key
///   Guarded  parts = [condition, value], guard: holds when condition = guard
struct AtomNode {
  AtomKind kind = AtomKind::Int;
  std::size_t hash = 0;
  Label fun;
  Stack stack;
  BigInt int_value;
  bool bool_value = false;
  BinOp op = BinOp::Add;
  std::vector<AbsRes> parts;
  std::vector<std::string> fields;
  std::string name;
  ParentKey key;
  bool guard = false;
};

Atom fun_atom(Label fun, Stack stack);
Atom int_atom(BigInt n);
Atom bool_atom(bool b);
Atom op_atom(AbsRes lhs, BinOp op, AbsRes rhs);
Atom record_atom(std::vector<std::string> fields, std::vector<AbsRes> values);
Atom proj_atom(AbsRes record, std::string field);
Atom inspect_atom(std::string field, AbsRes record);
Atom labeled_atom(AbsRes inner, ParentKey key);
Atom stub_atom(ParentKey key);
Atom guarded_atom(AbsRes condition, bool guard, AbsRes value);

/// Structural ordering: kind, then label, then stack, then contents.
std::strong_ordering compare(const Atom& a, const Atom& b);
bool equal(const Atom& a, const Atom& b);

/// Compact one-line rendering, e.g. `{0, ({1} + {stub@⟨7,[7]⟩})}`.
std::string render_compact(const AbsRes& r);
std::string render_compact(const Atom& a);

/// Number of atom occurrences (shared subterms counted each time).
std::size_t atom_count(const AbsRes& r);
bool contains_stub(const AbsRes& r);

// ---------------------------------------------------------------------------
// Fragment sets and visited sets
// ---------------------------------------------------------------------------

/// Set of stack fragments, sorted; cheap to copy (shared storage). Each
/// call records `ℓ ⋉_n Σ`, with n set by AnalyzeConfig::fragment_len.
class FragmentSet {
 public:
  FragmentSet();
  explicit FragmentSet(std::vector<Stack> stacks);

  const std::vector<Stack>& stacks() const { return *stacks_; }
  std::size_t size() const { return stacks_->size(); }
  bool contains(Stack s) const;
  bool includes(const FragmentSet& other) const;
  std::size_t hash() const { return hash_; }

  FragmentSet insert(Stack s) const;
  FragmentSet unite(const FragmentSet& other) const;

  friend bool operator==(const FragmentSet& a, const FragmentSet& b);

 private:
  std::shared_ptr<const std::vector<Stack>> stacks_;
  std::size_t hash_ = 0;
};

std::string to_string(const FragmentSet& s);

/// Multiset of ⟨site, Σ, S⟩ snapshots with scoped insertion.
class VisitedSet {
 public:
  struct Entry {
    Site site;
    Stack stack;
    FragmentSet fragments;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  bool contains(const Entry& e) const;
  void insert(const Entry& e);
  void erase(const Entry& e);
  std::size_t size() const { return count_; }

  class Scoped {
   public:
    Scoped(VisitedSet& v, Entry e) : v_(&v), e_(std::move(e)) { v_->insert(e_); }
    ~Scoped() {
      if (v_) v_->erase(e_);
    }
    Scoped(Scoped&& o) noexcept : v_(o.v_), e_(std::move(o.e_)) { o.v_ = nullptr; }
    Scoped(const Scoped&) = delete;
    Scoped& operator=(const Scoped&) = delete;
    Scoped& operator=(Scoped&&) = delete;

   private:
    VisitedSet* v_;
    Entry e_;
  };

 private:
  struct EntryHash {
    std::size_t operator()(const Entry& e) const noexcept;
  };
  std::unordered_map<Entry, std::size_t, EntryHash> entries_;
  std::size_t count_ = 0;
};

/// Conjunction of `result = bool` facts.
using PathCond = std::vector<std::pair<AbsRes, bool>>;

/// `l ⋉_k s`: push then keep the first k frames.
Stack push_frame_k(StackPool& pool, Label l, Stack s, std::size_t k);

/// {Σ ⧺ Σ' | ℓ ⧺ Σ ⧺ Σ' ∈ S}, canonically ordered.
std::vector<Stack> suffixes(Label l, Stack s, const FragmentSet& frags);

/// Stacks a Var rule may continue with after popping the top frame of `s`:
/// suffixes of `s` in `frags`, cut back to k frames.
std::vector<Stack> stitch(StackPool& pool, Stack s, const FragmentSet& frags, std::size_t k);

}  // namespace pdemand
