#include "pdemand/resval.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

#include "pdemand/chc.hpp"

namespace pdemand {

// ---------------------------------------------------------------------------
// AbsValue
// ---------------------------------------------------------------------------

AbsValue AbsValue::of_int(BigInt n) {
  AbsValue v;
  v.kind = Kind::Int;
  v.int_value = std::move(n);
  return v;
}

AbsValue AbsValue::of_bool(bool b) {
  AbsValue v;
  v.kind = Kind::Bool;
  v.bool_value = b;
  return v;
}

AbsValue AbsValue::of_fun(Label l, Stack s) {
  AbsValue v;
  v.kind = Kind::Fun;
  v.fun = l;
  v.stack = s;
  return v;
}

const AbsValue* AbsValue::field(const std::string& name) const {
  for (const auto& [n, v] : fields) {
    if (n == name) return &v;
  }
  return nullptr;
}

bool operator==(const AbsValue& a, const AbsValue& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case AbsValue::Kind::Int: return a.int_value == b.int_value;
    case AbsValue::Kind::Bool: return a.bool_value == b.bool_value;
    case AbsValue::Kind::Fun: return a.fun == b.fun && a.stack == b.stack;
    case AbsValue::Kind::Record: return a.fields == b.fields;
  }
  return false;
}

bool operator<(const AbsValue& a, const AbsValue& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  switch (a.kind) {
    case AbsValue::Kind::Int: return a.int_value < b.int_value;
    case AbsValue::Kind::Bool: return a.bool_value < b.bool_value;
    case AbsValue::Kind::Fun:
      if (a.fun != b.fun) return a.fun < b.fun;
      return (a.stack <=> b.stack) < 0;
    case AbsValue::Kind::Record: return a.fields < b.fields;
  }
  return false;
}

Value to_value(const AbsValue& v) {
  switch (v.kind) {
    case AbsValue::Kind::Int: return Value::of_int(v.int_value);
    case AbsValue::Kind::Bool: return Value::of_bool(v.bool_value);
    case AbsValue::Kind::Fun: return Value::of_fun(v.fun);
    case AbsValue::Kind::Record: {
      std::vector<std::pair<std::string, Value>> fs;
      for (const auto& [n, f] : v.fields) fs.emplace_back(n, to_value(f));
      return Value::of_record(std::move(fs));
    }
  }
  return {};
}

std::string render(const AbsValue& v) {
  if (v.kind == AbsValue::Kind::Fun) return "<fun@" + std::to_string(v.fun.id) + " " + to_string(v.stack) + ">";
  if (v.kind != AbsValue::Kind::Record) return render(to_value(v));
  std::string out = "{";
  for (std::size_t i = 0; i < v.fields.size(); ++i) {
    if (i) out += "; ";
    out += v.fields[i].first + " = " + render(v.fields[i].second);
  }
  return out + "}";
}

std::set<Value> ConcSet::plain() const {
  std::set<Value> out;
  for (const auto& v : values) out.insert(to_value(v));
  return out;
}

bool ConcSet::admits(const Value& v) const {
  if (widened) return true;
  for (const auto& a : values) {
    if (to_value(a) == v) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// abs_eval
// ---------------------------------------------------------------------------

namespace {

/// Parent bindings M as an interned persistent list, so that equal
/// environments are the same pointer and can key the memo table.
struct MCell {
  ParentKey key;
  AbsRes res;
  const MCell* next = nullptr;
};

class AbsEvaluator {
 public:
  AbsEvaluator(std::size_t depth, const AbsEvalOptions& o) : top_(depth), o_(o) {}

  ConcSet run(const AbsRes& r) { return eval_set(r, nullptr, top_, o_.guard_nesting.value_or(top_)); }

 private:
  struct MemoKey {
    const AtomNode* atom;
    const MCell* m;
    std::size_t d;
    std::size_t g;
    bool operator==(const MemoKey&) const = default;
  };
  struct MemoHash {
    std::size_t operator()(const MemoKey& k) const noexcept {
      std::size_t h = std::hash<const void*>{}(k.atom);
      h ^= std::hash<const void*>{}(k.m) + 0x9e3779b9 + (h << 6) + (h >> 2);
      h ^= k.d * 0x100000001b3ull + (h << 6) + (h >> 2);
      return h ^ (k.g * 0x51ed27u + (h >> 3));
    }
  };

  const MCell* lookup(const MCell* m, const ParentKey& key) const {
    for (; m; m = m->next) {
      if (m->key == key) return m;
    }
    return nullptr;
  }

  const MCell* bind(const MCell* m, const ParentKey& key, const AbsRes& res) {
    if (const MCell* hit = lookup(m, key); hit && hit->res == res) return m;
    std::size_t h = std::hash<const void*>{}(m) ^ (key.hash() * 31) ^ (res.hash() * 131);
    auto& bucket = cells_[h];
    for (const auto& c : bucket) {
      if (c->next == m && c->key == key && c->res == res) return c.get();
    }
    bucket.push_back(std::make_unique<MCell>(MCell{key, res, m}));
    return bucket.back().get();
  }

  void add(ConcSet& out, AbsValue v) const {
    if (out.values.size() >= o_.value_cap && !out.values.count(v)) {
      out.widened = out.capped = true;
      return;
    }
    out.values.insert(std::move(v));
  }

  void merge(ConcSet& out, const ConcSet& in) const {
    out.widened = out.widened || in.widened;
    out.capped = out.capped || in.capped;
    for (const auto& v : in.values) add(out, v);
  }

  ConcSet eval_set(const AbsRes& r, const MCell* m, std::size_t d, std::size_t g) {
    ConcSet out;
    for (const auto& a : r.atoms()) merge(out, eval_atom(a, m, d, g));
    return out;
  }

  ConcSet eval_atom(const Atom& a, const MCell* m, std::size_t d, std::size_t g) {
    MemoKey key{a.get(), m, d, g};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    ConcSet out = compute(a, m, d, g);
    memo_.emplace(key, out);
    return out;
  }

  bool mismatch(const std::string& what) const {
    if (o_.strict) throw EvalError(EvalError::Kind::TypeMismatch, what);
    return false;
  }

  ConcSet compute(const Atom& a, const MCell* m, std::size_t d, std::size_t g) {
    ConcSet out;
    switch (a->kind) {
      case AtomKind::Fun: out.values.insert(AbsValue::of_fun(a->fun, a->stack)); return out;
      case AtomKind::Int: out.values.insert(AbsValue::of_int(a->int_value)); return out;
      case AtomKind::Bool: out.values.insert(AbsValue::of_bool(a->bool_value)); return out;
      case AtomKind::Op: {
        ConcSet l = eval_set(a->parts[0], m, d, g);
        ConcSet r = eval_set(a->parts[1], m, d, g);
        out.widened = l.widened || r.widened;
        out.capped = l.capped || r.capped;
        if (l.values.size() * r.values.size() > o_.product_cap) {
          out.widened = out.capped = true;
          return out;
        }
        for (const auto& x : l.values) {
          for (const auto& y : r.values) {
            bool scalar_x = x.kind == AbsValue::Kind::Int || x.kind == AbsValue::Kind::Bool;
            bool scalar_y = y.kind == AbsValue::Kind::Int || y.kind == AbsValue::Kind::Bool;
            if (!scalar_x || !scalar_y) {
              mismatch("operator " + std::string(to_string(a->op)) + " on " + render(x) + " and " + render(y));
              continue;
            }
            try {
              Value v = apply_op(a->op, to_value(x), to_value(y));
              add(out, v.kind == Value::Kind::Int ? AbsValue::of_int(v.int_value) : AbsValue::of_bool(v.bool_value));
            } catch (const EvalError&) {
              if (o_.strict) throw;
            }
          }
        }
        return out;
      }
      case AtomKind::Record: {
        std::vector<ConcSet> parts;
        std::size_t product = 1;
        for (const auto& p : a->parts) {
          parts.push_back(eval_set(p, m, d, g));
          out.widened = out.widened || parts.back().widened;
          out.capped = out.capped || parts.back().capped;
          product *= std::max<std::size_t>(parts.back().values.size(), 1);
          if (parts.back().values.empty()) product = 0;
          if (product > o_.product_cap) {
            out.widened = out.capped = true;
            return out;
          }
        }
        if (product == 0) return out;
        std::vector<std::vector<AbsValue>> choices;
        for (const auto& p : parts) choices.emplace_back(p.values.begin(), p.values.end());
        std::vector<std::size_t> idx(choices.size(), 0);
        while (true) {
          AbsValue rec;
          rec.kind = AbsValue::Kind::Record;
          for (std::size_t i = 0; i < choices.size(); ++i) rec.fields.emplace_back(a->fields[i], choices[i][idx[i]]);
          add(out, std::move(rec));
          std::size_t i = 0;
          while (i < idx.size() && ++idx[i] == choices[i].size()) idx[i++] = 0;
          if (i == idx.size()) break;
        }
        return out;
      }
      case AtomKind::Proj:
      case AtomKind::Inspect: {
        ConcSet r = eval_set(a->parts[0], m, d, g);
        out.widened = r.widened;
        out.capped = r.capped;
        for (const auto& v : r.values) {
          if (v.kind != AbsValue::Kind::Record) {
            mismatch("field " + a->name + " of non-record " + render(v));
            continue;
          }
          const AbsValue* f = v.field(a->name);
          if (a->kind == AtomKind::Inspect) {
            add(out, AbsValue::of_bool(f != nullptr));
          } else if (f) {
            add(out, *f);
          } else {
            mismatch("record " + render(v) + " has no field " + a->name);
          }
        }
        return out;
      }
      case AtomKind::Labeled: return eval_set(a->parts[0], bind(m, a->key, a->parts[0]), d, g);
      case AtomKind::Stub: {
        const MCell* hit = lookup(m, a->key);
        if (!hit || d == 0) {
          out.widened = true;
          return out;
        }
        return eval_set(hit->res, m, d - 1, g);
      }
      case AtomKind::Guarded: {
        // only a condition with stubs can come back here
        bool open = contains_stub(a->parts[0]);
        if (g == 0 && open) {
          out.widened = true;
          return out;
        }
        ConcSet guard = eval_set(a->parts[0], m, top_, open ? g - 1 : g);
        if (guard.values.count(AbsValue::of_bool(a->guard))) {
          out = eval_set(a->parts[1], m, d, g);
          out.capped = out.capped || guard.capped;
          return out;
        }
        out.widened = guard.widened;
        out.capped = guard.capped;
        return out;
      }
    }
    return out;
  }

  std::size_t top_;
  const AbsEvalOptions& o_;
  std::unordered_map<std::size_t, std::vector<std::unique_ptr<MCell>>> cells_;
  std::unordered_map<MemoKey, ConcSet, MemoHash> memo_;
};

}  // namespace

ConcSet abs_eval(const AbsRes& r, std::size_t depth, const AbsEvalOptions& options) {
  return AbsEvaluator(depth, options).run(r);
}

// ---------------------------------------------------------------------------
// Branch feasibility
// ---------------------------------------------------------------------------

Feasibility branch_feasibility(const AbsRes& r_cond, const PathCond& pi, std::size_t depth,
                               const std::optional<SolverConfig>& solver) {
  AbsRes guarded = r_cond;
  for (auto it = pi.rbegin(); it != pi.rend(); ++it) {
    guarded = AbsRes::single(guarded_atom(it->first, it->second, guarded));
  }
  ConcSet cs = abs_eval(guarded, depth);
  Feasibility out;
  out.can_true = cs.values.count(AbsValue::of_bool(true)) > 0;
  out.can_false = cs.values.count(AbsValue::of_bool(false)) > 0;
  if (!cs.widened) return out;

  bool widened_true = !out.can_true;
  bool widened_false = !out.can_false;
  out.can_true = out.can_false = true;
  if (!solver) return out;

  std::optional<ChcSystem> system;
  try {
    system = to_chc(guarded);
  } catch (const ChcError&) {
    return out;
  }
  if (system->sorts[system->root] != Sort::Bool) return out;
  auto refute = [&](bool b) {
    ++out.solver_queries;
    Query q{system->root, std::string("(= q ") + (b ? "true" : "false") + ")"};
    return solve(*system, q, *solver).verdict == Verdict::Verified;
  };
  if (widened_true && refute(true)) out.can_true = false;
  if (widened_false && refute(false)) out.can_false = false;
  return out;
}

// ---------------------------------------------------------------------------
// Simplification
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kRewriteCap = 100000;
constexpr std::size_t kDistributeCap = 64;
constexpr std::size_t kFoldCap = 256;

Atom atom_of(const AbsValue& v) {
  switch (v.kind) {
    case AbsValue::Kind::Int: return int_atom(v.int_value);
    case AbsValue::Kind::Bool: return bool_atom(v.bool_value);
    case AbsValue::Kind::Fun: return fun_atom(v.fun, v.stack);
    case AbsValue::Kind::Record: {
      std::vector<std::string> names;
      std::vector<AbsRes> parts;
      for (const auto& [n, f] : v.fields) {
        names.push_back(n);
        parts.push_back(AbsRes::single(atom_of(f)));
      }
      return record_atom(std::move(names), std::move(parts));
    }
  }
  return int_atom(0);
}

bool is_literal(const Atom& a) { return a->kind == AtomKind::Int || a->kind == AtomKind::Bool; }

bool only_kind(const AbsRes& r, AtomKind k) {
  if (r.empty()) return false;
  for (const auto& a : r.atoms()) {
    if (a->kind != k) return false;
  }
  return true;
}

class Simplifier {
 public:
  explicit Simplifier(SimplifyStats& stats) : stats_(stats) {}

  AbsRes run(const AbsRes& input) {
    collect_parents(input);
    AbsRes cur = input;
    for (std::size_t pass = 0; pass < 256; ++pass) {
      ++stats_.passes;
      memo_.clear();
      AbsRes next = simp_set(cur);
      if (next == cur || stats_.capped) return next;
      cur = std::move(next);
    }
    return cur;
  }

 private:
  struct Info {
    bool has_stub = false;
    std::vector<ParentKey> free;  // sorted, unique
  };

  void collect_parents(const AbsRes& r) {
    std::unordered_map<const AtomNode*, bool> seen;
    std::vector<const AbsRes*> work{&r};
    while (!work.empty()) {
      const AbsRes* s = work.back();
      work.pop_back();
      for (const auto& a : s->atoms()) {
        if (!seen.emplace(a.get(), true).second) continue;
        if (a->kind == AtomKind::Labeled && !parents_.count(a->key)) parents_.emplace(a->key, a->parts[0]);
        if (a->kind == AtomKind::Proj || a->kind == AtomKind::Inspect) ++unroll_budget_;
        for (const auto& p : a->parts) work.push_back(&p);
      }
    }
  }

  const Info& info(const Atom& a) {
    if (auto it = info_.find(a.get()); it != info_.end()) return it->second.second;
    Info out;
    if (a->kind == AtomKind::Stub) {
      out.has_stub = true;
      out.free.push_back(a->key);
    }
    for (const auto& p : a->parts) {
      for (const auto& c : p.atoms()) {
        const Info& ci = info(c);
        out.has_stub = out.has_stub || ci.has_stub;
        std::vector<ParentKey> merged;
        std::set_union(out.free.begin(), out.free.end(), ci.free.begin(), ci.free.end(), std::back_inserter(merged));
        out.free = std::move(merged);
      }
    }
    if (a->kind == AtomKind::Labeled) std::erase(out.free, a->key);
    return info_.emplace(a.get(), std::make_pair(a, std::move(out))).first->second.second;
  }

  bool has_stub(const AbsRes& r) {
    for (const auto& a : r.atoms()) {
      if (info(a).has_stub) return true;
    }
    return false;
  }

  bool mentions_key(const AbsRes& r, const ParentKey& k) {
    for (const auto& a : r.atoms()) {
      if (a->kind == AtomKind::Stub && a->key == k) return true;
      if (!info(a).has_stub) continue;
      for (const auto& p : a->parts) {
        if (mentions_key(p, k)) return true;
      }
    }
    return false;
  }

  bool rewrite() {
    if (stats_.rewrites >= kRewriteCap) {
      stats_.capped = true;
      return false;
    }
    ++stats_.rewrites;
    return true;
  }

  AbsRes simp_set(const AbsRes& r) {
    std::vector<Atom> atoms;
    for (const auto& a : r.atoms()) {
      for (auto& b : simp_atom(a)) atoms.push_back(std::move(b));
    }
    AbsRes out(std::move(atoms));
    // (1) stub-free sets are replaced by their values
    bool evaluable = false;
    for (const auto& a : out.atoms()) evaluable = evaluable || !(is_literal(a) || a->kind == AtomKind::Fun);
    if (evaluable && !has_stub(out)) {
      try {
        AbsEvalOptions o;
        o.strict = true;
        ConcSet cs = abs_eval(out, 0, o);
        if (!cs.widened && cs.values.size() <= kFoldCap && rewrite()) {
          std::vector<Atom> vals;
          for (const auto& v : cs.values) vals.push_back(atom_of(v));
          ++stats_.folded;
          return AbsRes(std::move(vals));
        }
      } catch (const EvalError&) {
      }
    }
    return out;
  }

  const std::vector<Atom>& simp_atom(const Atom& a) {
    if (auto it = memo_.find(a.get()); it != memo_.end()) return it->second.second;
    Atom b = a;
    if (!a->parts.empty()) {
      std::vector<AbsRes> parts;
      bool changed = false;
      for (const auto& p : a->parts) {
        parts.push_back(simp_set(p));
        changed = changed || !(parts.back() == p);
      }
      if (changed) b = rebuild(a, std::move(parts));
    }
    std::vector<Atom> out = rules(b, 0);
    return memo_.emplace(a.get(), std::make_pair(a, std::move(out))).first->second.second;
  }

  static Atom rebuild(const Atom& a, std::vector<AbsRes> parts) {
    switch (a->kind) {
      case AtomKind::Op: return op_atom(parts[0], a->op, parts[1]);
      case AtomKind::Record: return record_atom(a->fields, std::move(parts));
      case AtomKind::Proj: return proj_atom(parts[0], a->name);
      case AtomKind::Inspect: return inspect_atom(a->name, parts[0]);
      case AtomKind::Labeled: return labeled_atom(parts[0], a->key);
      case AtomKind::Guarded: return guarded_atom(parts[0], a->guard, parts[1]);
      default: return a;
    }
  }

  static std::vector<Atom> splice(const AbsRes& r) { return r.atoms(); }

  std::vector<Atom> rules_all(const std::vector<Atom>& in, int depth) {
    std::vector<Atom> out;
    for (const auto& a : in) {
      for (auto& b : rules(a, depth + 1)) out.push_back(std::move(b));
    }
    return out;
  }

  /// Atom-level rewrites on an atom whose children are already simplified.
  std::vector<Atom> rules(const Atom& a, int depth) {
    if (depth > 8 || stats_.capped) return {a};
    switch (a->kind) {
      case AtomKind::Op: return op_rules(a, depth);
      case AtomKind::Proj:
      case AtomKind::Inspect: return field_rules(a, depth);
      case AtomKind::Guarded: {
        const AbsRes& c = a->parts[0];
        if (!only_kind(c, AtomKind::Bool)) return {a};
        bool has_b = false;
        for (const auto& x : c.atoms()) has_b = has_b || x->bool_value == a->guard;
        if (!has_b) {
          if (!rewrite()) return {a};
          ++stats_.folded;
          return {};
        }
        if (c.size() == 1 && rewrite()) {
          ++stats_.folded;
          return splice(a->parts[1]);
        }
        return {a};
      }
      case AtomKind::Labeled: {
        // r = {stub of r} has the empty least fixpoint
        bool self_only = !a->parts[0].empty();
        for (const auto& c : a->parts[0].atoms()) {
          self_only = self_only && c->kind == AtomKind::Stub && c->key == a->key;
        }
        if (self_only && rewrite()) {
          ++stats_.dropped_labels;
          return {};
        }
        bool referenced = false;
        for (const auto& c : a->parts[0].atoms()) {
          const Info& ci = info(c);
          if (std::binary_search(ci.free.begin(), ci.free.end(), a->key)) referenced = true;
        }
        if (!referenced && rewrite()) {
          ++stats_.dropped_labels;
          return splice(a->parts[0]);
        }
        return {a};
      }
      default: return {a};
    }
  }

  std::vector<Atom> op_rules(const Atom& a, int depth) {
    const AbsRes& l = a->parts[0];
    const AbsRes& r = a->parts[1];
    // (2) constant folding
    if (l.size() == 1 && r.size() == 1 && is_literal(l.atoms()[0]) && is_literal(r.atoms()[0])) {
      AbsEvalOptions o;
      o.strict = true;
      try {
        ConcSet cs = abs_eval(AbsRes::single(a), 0, o);
        if (cs.values.size() == 1 && rewrite()) {
          ++stats_.folded;
          return {atom_of(*cs.values.begin())};
        }
      } catch (const EvalError&) {
      }
      return {a};
    }
    // (3) associativity, right-nested literal pairs only: n1 + (n2 op x) => (n1 + n2) op x
    if ((a->op == BinOp::Add || a->op == BinOp::Sub) && l.size() == 1 && r.size() == 1 &&
        l.atoms()[0]->kind == AtomKind::Int) {
      const Atom& inner = r.atoms()[0];
      if (inner->kind == AtomKind::Op && (inner->op == BinOp::Add || inner->op == BinOp::Sub) &&
          inner->parts[0].size() == 1 && inner->parts[0].atoms()[0]->kind == AtomKind::Int && rewrite()) {
        const BigInt& n1 = l.atoms()[0]->int_value;
        const BigInt& n2 = inner->parts[0].atoms()[0]->int_value;
        BigInt folded = a->op == BinOp::Add ? BigInt(n1 + n2) : BigInt(n1 - n2);
        BinOp op = inner->op;
        if (a->op == BinOp::Sub) op = inner->op == BinOp::Add ? BinOp::Sub : BinOp::Add;
        return rules(op_atom(AbsRes::single(int_atom(folded)), op, inner->parts[1]), depth + 1);
      }
    }
    // (6) distribution into sets
    if ((l.size() > 1 || r.size() > 1) && l.size() * r.size() <= kDistributeCap && !l.empty() && !r.empty() &&
        rewrite()) {
      ++stats_.distributed;
      std::vector<Atom> out;
      for (const auto& x : l.atoms()) {
        for (const auto& y : r.atoms()) out.push_back(op_atom(AbsRes::single(x), a->op, AbsRes::single(y)));
      }
      return rules_all(out, depth);
    }
    if (l.size() == 1 && r.size() == 1) {
      const Atom& x = l.atoms()[0];
      const Atom& y = r.atoms()[0];
      // (7) merging of cycles with identical labels
      if (x->kind == AtomKind::Labeled && y->kind == AtomKind::Labeled && x->key == y->key &&
          !mentions_key(x->parts[0], x->key) && !mentions_key(y->parts[0], y->key) && rewrite()) {
        return {labeled_atom(AbsRes::single(op_atom(x->parts[0], a->op, y->parts[0])), x->key)};
      }
      // (8) merging of path conditions
      if (x->kind == AtomKind::Guarded && y->kind == AtomKind::Guarded && x->guard == y->guard &&
          x->parts[0] == y->parts[0] && rewrite()) {
        return {guarded_atom(x->parts[0], x->guard, AbsRes::single(op_atom(x->parts[1], a->op, y->parts[1])))};
      }
    }
    return {a};
  }

  std::vector<Atom> field_rules(const Atom& a, int depth) {
    const AbsRes& rec = a->parts[0];
    // (4) record projection / inspection
    if (only_kind(rec, AtomKind::Record)) {
      std::vector<Atom> out;
      for (const auto& r : rec.atoms()) {
        auto it = std::find(r->fields.begin(), r->fields.end(), a->name);
        if (a->kind == AtomKind::Inspect) {
          out.push_back(bool_atom(it != r->fields.end()));
        } else {
          if (it == r->fields.end()) return {a};
          for (const auto& v : r->parts[it - r->fields.begin()].atoms()) out.push_back(v);
        }
      }
      if (!rewrite()) return {a};
      return out;
    }
    // (5) unrolling of a stub under a projection, budgeted per occurrence
    bool has_parented_stub = false;
    for (const auto& x : rec.atoms()) {
      has_parented_stub = has_parented_stub || (x->kind == AtomKind::Stub && parents_.count(x->key));
    }
    if (has_parented_stub && unroll_budget_ > 0) {
      std::vector<Atom> atoms;
      for (const auto& x : rec.atoms()) {
        if (x->kind == AtomKind::Stub && parents_.count(x->key)) {
          for (const auto& y : parents_.at(x->key).atoms()) atoms.push_back(y);
        } else {
          atoms.push_back(x);
        }
      }
      AbsRes unrolled(std::move(atoms));
      // only when the field access then resolves; otherwise it just nests
      if (!only_kind(unrolled, AtomKind::Record) || !rewrite()) return {a};
      --unroll_budget_;
      ++stats_.unrolled;
      Atom next = a->kind == AtomKind::Proj ? proj_atom(unrolled, a->name) : inspect_atom(a->name, unrolled);
      return rules(next, depth + 1);
    }
    return {a};
  }

  SimplifyStats& stats_;
  std::map<ParentKey, AbsRes> parents_;
  std::size_t unroll_budget_ = 0;
  std::unordered_map<const AtomNode*, std::pair<Atom, Info>> info_;
  std::unordered_map<const AtomNode*, std::pair<Atom, std::vector<Atom>>> memo_;
};

}  // namespace

AbsRes simplify(const AbsRes& r, SimplifyStats* stats) {
  SimplifyStats local;
  SimplifyStats& s = stats ? *stats : local;
  s = SimplifyStats{};
  return Simplifier(s).run(r);
}

}  // namespace pdemand
