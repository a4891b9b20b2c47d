#include "pdemand/abs.hpp"

#include <algorithm>
#include <sstream>

namespace pdemand {

namespace {

inline std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

std::size_t hash_string(const std::string& s) { return std::hash<std::string>{}(s); }

std::size_t hash_bigint(const BigInt& n) { return std::hash<std::string>{}(n.str()); }

}  // namespace

std::strong_ordering operator<=>(const Site& a, const Site& b) {
  if (auto c = a.kind <=> b.kind; c != 0) return c;
  if (auto c = a.label <=> b.label; c != 0) return c;
  return a.name.compare(b.name) <=> 0;
}

std::string to_string(const Site& s) {
  if (s.kind == Site::Kind::App) return std::to_string(s.label.id);
  return s.name + "^" + std::to_string(s.label.id);
}

std::strong_ordering operator<=>(const ParentKey& a, const ParentKey& b) {
  if (auto c = a.site <=> b.site; c != 0) return c;
  return a.stack <=> b.stack;
}

std::size_t ParentKey::hash() const {
  std::size_t h = mix(static_cast<std::size_t>(site.kind), site.label.id);
  h = mix(h, hash_string(site.name));
  return mix(h, stack.hash());
}

std::string to_string(const ParentKey& k) { return "⟨" + to_string(k.site) + "," + to_string(k.stack) + "⟩"; }

std::string_view to_string(AtomKind k) {
  switch (k) {
    case AtomKind::Fun: return "fun";
    case AtomKind::Int: return "int";
    case AtomKind::Bool: return "bool";
    case AtomKind::Op: return "op";
    case AtomKind::Record: return "record";
    case AtomKind::Proj: return "proj";
    case AtomKind::Inspect: return "inspect";
    case AtomKind::Labeled: return "labeled";
    case AtomKind::Stub: return "stub";
    case AtomKind::Guarded: return "guarded";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

namespace {

std::size_t compute_hash(const AtomNode& n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ull;
  switch (n.kind) {
    case AtomKind::Fun:
      h = mix(h, n.fun.id);
      h = mix(h, n.stack.hash());
      break;
    case AtomKind::Int: h = mix(h, hash_bigint(n.int_value)); break;
    case AtomKind::Bool: h = mix(h, n.bool_value); break;
    case AtomKind::Op: h = mix(h, static_cast<std::size_t>(n.op)); break;
    case AtomKind::Record:
      for (const auto& f : n.fields) h = mix(h, hash_string(f));
      break;
    case AtomKind::Proj:
    case AtomKind::Inspect: h = mix(h, hash_string(n.name)); break;
    case AtomKind::Labeled:
    case AtomKind::Stub: h = mix(h, n.key.hash()); break;
    case AtomKind::Guarded: h = mix(h, n.guard); break;
  }
  for (const auto& p : n.parts) h = mix(h, p.hash());
  return h;
}

Atom finish(std::shared_ptr<AtomNode> n) {
  n->hash = compute_hash(*n);
  return n;
}

std::shared_ptr<AtomNode> node(AtomKind k) {
  auto n = std::make_shared<AtomNode>();
  n->kind = k;
  return n;
}

std::strong_ordering compare_parts(const std::vector<AbsRes>& a, const std::vector<AbsRes>& b) {
  if (auto c = a.size() <=> b.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (auto c = a[i] <=> b[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

}  // namespace

Atom fun_atom(Label fun, Stack stack) {
  auto n = node(AtomKind::Fun);
  n->fun = fun;
  n->stack = stack;
  return finish(n);
}

Atom int_atom(BigInt v) {
  auto n = node(AtomKind::Int);
  n->int_value = std::move(v);
  return finish(n);
}

Atom bool_atom(bool b) {
  auto n = node(AtomKind::Bool);
  n->bool_value = b;
  return finish(n);
}

Atom op_atom(AbsRes lhs, BinOp op, AbsRes rhs) {
  auto n = node(AtomKind::Op);
  n->op = op;
  n->parts = {std::move(lhs), std::move(rhs)};
  return finish(n);
}

Atom record_atom(std::vector<std::string> fields, std::vector<AbsRes> values) {
  auto n = node(AtomKind::Record);
  n->fields = std::move(fields);
  n->parts = std::move(values);
  return finish(n);
}

Atom proj_atom(AbsRes record, std::string field) {
  auto n = node(AtomKind::Proj);
  n->name = std::move(field);
  n->parts = {std::move(record)};
  return finish(n);
}

Atom inspect_atom(std::string field, AbsRes record) {
  auto n = node(AtomKind::Inspect);
  n->name = std::move(field);
  n->parts = {std::move(record)};
  return finish(n);
}

Atom labeled_atom(AbsRes inner, ParentKey key) {
  auto n = node(AtomKind::Labeled);
  n->key = std::move(key);
  n->parts = {std::move(inner)};
  return finish(n);
}

Atom stub_atom(ParentKey key) {
  auto n = node(AtomKind::Stub);
  n->key = std::move(key);
  return finish(n);
}

Atom guarded_atom(AbsRes condition, bool guard, AbsRes value) {
  auto n = node(AtomKind::Guarded);
  n->guard = guard;
  n->parts = {std::move(condition), std::move(value)};
  return finish(n);
}

std::strong_ordering compare(const Atom& a, const Atom& b) {
  if (a == b) return std::strong_ordering::equal;
  if (auto c = a->kind <=> b->kind; c != 0) return c;
  switch (a->kind) {
    case AtomKind::Fun:
      if (auto c = a->fun <=> b->fun; c != 0) return c;
      return a->stack <=> b->stack;
    case AtomKind::Int:
      if (a->int_value < b->int_value) return std::strong_ordering::less;
      if (b->int_value < a->int_value) return std::strong_ordering::greater;
      return std::strong_ordering::equal;
    case AtomKind::Bool: return a->bool_value <=> b->bool_value;
    case AtomKind::Op:
      if (auto c = a->op <=> b->op; c != 0) return c;
      break;
    case AtomKind::Record:
      if (auto c = a->fields <=> b->fields; c != 0) return c;
      break;
    case AtomKind::Proj:
    case AtomKind::Inspect:
      if (auto c = a->name.compare(b->name) <=> 0; c != 0) return c;
      break;
    case AtomKind::Labeled:
      if (auto c = a->key <=> b->key; c != 0) return c;
      break;
    case AtomKind::Stub: return a->key <=> b->key;
    case AtomKind::Guarded:
      if (auto c = a->guard <=> b->guard; c != 0) return c;
      break;
  }
  return compare_parts(a->parts, b->parts);
}

bool equal(const Atom& a, const Atom& b) {
  if (a == b) return true;
  if (a->hash != b->hash) return false;
  return compare(a, b) == 0;
}

// ---------------------------------------------------------------------------
// Sets
// ---------------------------------------------------------------------------

AbsRes::AbsRes(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return compare(a, b) < 0; });
  atoms_.erase(std::unique(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return equal(a, b); }),
               atoms_.end());
  for (const auto& a : atoms_) hash_ = mix(hash_, a->hash);
}

AbsRes AbsRes::single(Atom a) { return AbsRes(std::vector<Atom>{std::move(a)}); }

AbsRes AbsRes::unite(const AbsRes& other) const {
  if (other.empty()) return *this;
  if (empty()) return other;
  std::vector<Atom> merged;
  merged.reserve(atoms_.size() + other.atoms_.size());
  std::merge(atoms_.begin(), atoms_.end(), other.atoms_.begin(), other.atoms_.end(), std::back_inserter(merged),
             [](const Atom& a, const Atom& b) { return compare(a, b) < 0; });
  return AbsRes(std::move(merged));
}

bool operator==(const AbsRes& a, const AbsRes& b) {
  if (a.hash_ != b.hash_ || a.atoms_.size() != b.atoms_.size()) return false;
  for (std::size_t i = 0; i < a.atoms_.size(); ++i) {
    if (!equal(a.atoms_[i], b.atoms_[i])) return false;
  }
  return true;
}

std::strong_ordering operator<=>(const AbsRes& a, const AbsRes& b) {
  std::size_t n = std::min(a.atoms_.size(), b.atoms_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = compare(a.atoms_[i], b.atoms_[i]); c != 0) return c;
  }
  return a.atoms_.size() <=> b.atoms_.size();
}

namespace {

void render_atom(const Atom& a, std::ostream& out);

void render_set(const AbsRes& r, std::ostream& out) {
  if (r.size() == 1 && r.atoms()[0]->kind != AtomKind::Labeled) {
    render_atom(r.atoms()[0], out);
    return;
  }
  out << '{';
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) out << ", ";
    render_atom(r.atoms()[i], out);
  }
  out << '}';
}

void render_atom(const Atom& a, std::ostream& out) {
  switch (a->kind) {
    case AtomKind::Fun: out << "fun@" << a->fun.id << to_string(a->stack); return;
    case AtomKind::Int: out << a->int_value.str(); return;
    case AtomKind::Bool: out << (a->bool_value ? "true" : "false"); return;
    case AtomKind::Op:
      out << '(';
      render_set(a->parts[0], out);
      out << ' ' << to_string(a->op) << ' ';
      render_set(a->parts[1], out);
      out << ')';
      return;
    case AtomKind::Record:
      out << '{';
      for (std::size_t i = 0; i < a->fields.size(); ++i) {
        if (i) out << "; ";
        out << a->fields[i] << " = ";
        render_set(a->parts[i], out);
      }
      out << '}';
      return;
    case AtomKind::Proj:
      render_set(a->parts[0], out);
      out << '.' << a->name;
      return;
    case AtomKind::Inspect:
      out << '(' << a->name << " in ";
      render_set(a->parts[0], out);
      out << ')';
      return;
    case AtomKind::Labeled:
      out << '{';
      for (std::size_t i = 0; i < a->parts[0].size(); ++i) {
        if (i) out << ", ";
        render_atom(a->parts[0].atoms()[i], out);
      }
      out << '}' << to_string(a->key);
      return;
    case AtomKind::Stub: out << "stub@" << to_string(a->key); return;
    case AtomKind::Guarded:
      out << '(';
      render_set(a->parts[0], out);
      out << " = " << (a->guard ? "true" : "false") << " ⊩ ";
      render_set(a->parts[1], out);
      out << ')';
      return;
  }
}

}  // namespace

std::string render_compact(const AbsRes& r) {
  std::ostringstream out;
  render_set(r, out);
  return out.str();
}

std::string render_compact(const Atom& a) {
  std::ostringstream out;
  render_atom(a, out);
  return out.str();
}

std::size_t atom_count(const AbsRes& r) {
  std::size_t n = 0;
  for (const auto& a : r.atoms()) {
    ++n;
    for (const auto& p : a->parts) n += atom_count(p);
  }
  return n;
}

bool contains_stub(const AbsRes& r) {
  for (const auto& a : r.atoms()) {
    if (a->kind == AtomKind::Stub) return true;
    for (const auto& p : a->parts) {
      if (contains_stub(p)) return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Fragments
// ---------------------------------------------------------------------------

namespace {

bool stack_less(Stack a, Stack b) { return (a <=> b) < 0; }

std::size_t hash_stacks(const std::vector<Stack>& v) {
  std::size_t h = 0xf00du;
  for (Stack s : v) h = mix(h, s.hash());
  return h;
}

}  // namespace

FragmentSet::FragmentSet() : stacks_(std::make_shared<const std::vector<Stack>>()), hash_(hash_stacks({})) {}

FragmentSet::FragmentSet(std::vector<Stack> stacks) {
  std::sort(stacks.begin(), stacks.end(), stack_less);
  stacks.erase(std::unique(stacks.begin(), stacks.end()), stacks.end());
  hash_ = hash_stacks(stacks);
  stacks_ = std::make_shared<const std::vector<Stack>>(std::move(stacks));
}

bool FragmentSet::contains(Stack s) const { return std::binary_search(stacks_->begin(), stacks_->end(), s, stack_less); }

bool FragmentSet::includes(const FragmentSet& other) const {
  if (stacks_ == other.stacks_) return true;
  return std::includes(stacks_->begin(), stacks_->end(), other.stacks_->begin(), other.stacks_->end(), stack_less);
}

FragmentSet FragmentSet::insert(Stack s) const {
  if (contains(s)) return *this;
  std::vector<Stack> v = *stacks_;
  v.insert(std::upper_bound(v.begin(), v.end(), s, stack_less), s);
  FragmentSet out;
  out.hash_ = hash_stacks(v);
  out.stacks_ = std::make_shared<const std::vector<Stack>>(std::move(v));
  return out;
}

FragmentSet FragmentSet::unite(const FragmentSet& other) const {
  if (stacks_ == other.stacks_ || includes(other)) return *this;
  if (other.includes(*this)) return other;
  std::vector<Stack> v;
  v.reserve(size() + other.size());
  std::set_union(stacks_->begin(), stacks_->end(), other.stacks_->begin(), other.stacks_->end(),
                 std::back_inserter(v), stack_less);
  FragmentSet out;
  out.hash_ = hash_stacks(v);
  out.stacks_ = std::make_shared<const std::vector<Stack>>(std::move(v));
  return out;
}

bool operator==(const FragmentSet& a, const FragmentSet& b) {
  if (a.stacks_ == b.stacks_) return true;
  return a.hash_ == b.hash_ && *a.stacks_ == *b.stacks_;
}

std::string to_string(const FragmentSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += to_string(s.stacks()[i]);
  }
  return out + "}";
}

std::size_t VisitedSet::EntryHash::operator()(const Entry& e) const noexcept {
  std::size_t h = ParentKey{e.site, e.stack}.hash();
  return mix(h, e.fragments.hash());
}

bool VisitedSet::contains(const Entry& e) const { return entries_.find(e) != entries_.end(); }

void VisitedSet::insert(const Entry& e) {
  ++entries_[e];
  ++count_;
}

void VisitedSet::erase(const Entry& e) {
  auto it = entries_.find(e);
  if (it == entries_.end()) return;
  if (--it->second == 0) entries_.erase(it);
  --count_;
}

Stack push_frame_k(StackPool& pool, Label l, Stack s, std::size_t k) {
  if (k == 0) return pool.empty();
  return pool.truncate(pool.push(l, s), k);
}

std::vector<Stack> suffixes(Label l, Stack s, const FragmentSet& frags) {
  std::vector<Stack> out;
  for (Stack f : frags.stacks()) {
    if (f.empty() || f.head() != l) continue;
    Stack rest = f.tail();
    if (rest.starts_with(s)) out.push_back(rest);
  }
  std::sort(out.begin(), out.end(), stack_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace pdemand

namespace pdemand {

std::vector<Stack> stitch(StackPool& pool, Stack s, const FragmentSet& frags, std::size_t k) {
  std::vector<Stack> out;
  for (Stack t : suffixes(s.head(), s.tail(), frags)) out.push_back(pool.truncate(t, k));
  std::sort(out.begin(), out.end(), stack_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace pdemand
