#include "pdemand/render.hpp"

#include <map>
#include <optional>
#include <tuple>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace pdemand {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Tree text
// ---------------------------------------------------------------------------

namespace {

void tree_set(const AbsRes& r, int indent, std::ostringstream& out);

void line(std::ostringstream& out, int indent, const std::string& text) {
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << text << '\n';
}

void tree_atom(const Atom& a, int indent, std::ostringstream& out) {
  switch (a->kind) {
    case AtomKind::Fun:
    case AtomKind::Int:
    case AtomKind::Bool:
    case AtomKind::Stub: line(out, indent, render_compact(a)); return;
    case AtomKind::Op:
      line(out, indent, std::string("op ") + std::string(to_string(a->op)));
      line(out, indent + 1, "lhs:");
      tree_set(a->parts[0], indent + 2, out);
      line(out, indent + 1, "rhs:");
      tree_set(a->parts[1], indent + 2, out);
      return;
    case AtomKind::Record:
      line(out, indent, "record");
      for (std::size_t i = 0; i < a->fields.size(); ++i) {
        line(out, indent + 1, a->fields[i] + " =");
        tree_set(a->parts[i], indent + 2, out);
      }
      return;
    case AtomKind::Proj:
    case AtomKind::Inspect:
      line(out, indent, (a->kind == AtomKind::Proj ? "proj ." : "inspect ") + a->name);
      tree_set(a->parts[0], indent + 1, out);
      return;
    case AtomKind::Labeled:
      line(out, indent, "labeled " + to_string(a->key));
      tree_set(a->parts[0], indent + 1, out);
      return;
    case AtomKind::Guarded:
      line(out, indent, std::string("guarded = ") + (a->guard ? "true" : "false"));
      line(out, indent + 1, "cond:");
      tree_set(a->parts[0], indent + 2, out);
      line(out, indent + 1, "value:");
      tree_set(a->parts[1], indent + 2, out);
      return;
  }
}

void tree_set(const AbsRes& r, int indent, std::ostringstream& out) {
  if (r.empty()) line(out, indent, "{}");
  for (const auto& a : r.atoms()) tree_atom(a, indent, out);
}

}  // namespace

std::string render_tree(const AbsRes& r) {
  std::ostringstream out;
  tree_set(r, 0, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

json stack_json(Stack s) {
  json out = json::array();
  for (Label l : s.labels()) out.push_back(l.id);
  return out;
}

json site_json(const Site& s) {
  if (s.kind == Site::Kind::App) return {{"kind", "app"}, {"label", s.label.id}};
  return {{"kind", "var"}, {"name", s.name}, {"label", s.label.id}};
}

json int_json(const BigInt& n) {
  if (n >= std::numeric_limits<std::int64_t>::min() && n <= std::numeric_limits<std::int64_t>::max()) {
    return static_cast<std::int64_t>(n);
  }
  return n.str();
}

json set_json(const AbsRes& r);

json atom_json(const Atom& a) {
  json out;
  out["kind"] = std::string(to_string(a->kind));
  switch (a->kind) {
    case AtomKind::Fun:
      out["label"] = a->fun.id;
      out["stack"] = stack_json(a->stack);
      break;
    case AtomKind::Int: out["value"] = int_json(a->int_value); break;
    case AtomKind::Bool: out["value"] = a->bool_value; break;
    case AtomKind::Op:
      out["op"] = std::string(to_string(a->op));
      out["lhs"] = set_json(a->parts[0]);
      out["rhs"] = set_json(a->parts[1]);
      break;
    case AtomKind::Record: {
      json fs = json::array();
      for (std::size_t i = 0; i < a->fields.size(); ++i) {
        fs.push_back({{"name", a->fields[i]}, {"value", set_json(a->parts[i])}});
      }
      out["fields"] = fs;
      break;
    }
    case AtomKind::Proj:
    case AtomKind::Inspect:
      out["field"] = a->name;
      out["record"] = set_json(a->parts[0]);
      break;
    case AtomKind::Labeled:
      out["site"] = site_json(a->key.site);
      out["stack"] = stack_json(a->key.stack);
      out["value"] = set_json(a->parts[0]);
      break;
    case AtomKind::Stub:
      out["site"] = site_json(a->key.site);
      out["stack"] = stack_json(a->key.stack);
      break;
    case AtomKind::Guarded:
      out["cond"] = set_json(a->parts[0]);
      out["equals"] = a->guard;
      out["value"] = set_json(a->parts[1]);
      break;
  }
  return out;
}

json set_json(const AbsRes& r) {
  json out = json::array();
  for (const auto& a : r.atoms()) out.push_back(atom_json(a));
  return out;
}

BinOp parse_op(const std::string& s) {
  for (BinOp op : {BinOp::Add, BinOp::Sub, BinOp::Eq, BinOp::Lt, BinOp::Le, BinOp::Ge, BinOp::And, BinOp::Or,
                   BinOp::Xor}) {
    if (to_string(op) == s) return op;
  }
  throw std::invalid_argument("unknown operator " + s);
}

class JsonReader {
 public:
  explicit JsonReader(StackPool& pool) : pool_(pool) {}

  AbsRes set(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("result set must be an array");
    std::vector<Atom> atoms;
    for (const auto& a : j) atoms.push_back(atom(a));
    return AbsRes(std::move(atoms));
  }

 private:
  Stack stack(const json& j) {
    std::vector<Label> ls;
    for (const auto& x : j) ls.push_back(Label{x.get<std::uint32_t>()});
    return pool_.from(ls);
  }

  Site site(const json& j) {
    Label l{j.at("label").get<std::uint32_t>()};
    if (j.at("kind") == "app") return Site::app(l);
    return Site::var(j.at("name").get<std::string>(), l);
  }

  Atom atom(const json& j) {
    std::string kind = j.at("kind");
    if (kind == "fun") return fun_atom(Label{j.at("label").get<std::uint32_t>()}, stack(j.at("stack")));
    if (kind == "int") {
      const json& v = j.at("value");
      return int_atom(v.is_string() ? BigInt(v.get<std::string>()) : BigInt(v.get<std::int64_t>()));
    }
    if (kind == "bool") return bool_atom(j.at("value").get<bool>());
    if (kind == "op") return op_atom(set(j.at("lhs")), parse_op(j.at("op")), set(j.at("rhs")));
    if (kind == "record") {
      std::vector<std::string> names;
      std::vector<AbsRes> parts;
      for (const auto& f : j.at("fields")) {
        names.push_back(f.at("name"));
        parts.push_back(set(f.at("value")));
      }
      return record_atom(std::move(names), std::move(parts));
    }
    if (kind == "proj") return proj_atom(set(j.at("record")), j.at("field"));
    if (kind == "inspect") return inspect_atom(j.at("field"), set(j.at("record")));
    if (kind == "labeled") return labeled_atom(set(j.at("value")), ParentKey{site(j.at("site")), stack(j.at("stack"))});
    if (kind == "stub") return stub_atom(ParentKey{site(j.at("site")), stack(j.at("stack"))});
    if (kind == "guarded") return guarded_atom(set(j.at("cond")), j.at("equals").get<bool>(), set(j.at("value")));
    throw std::invalid_argument("unknown atom kind " + kind);
  }

  StackPool& pool_;
};

}  // namespace

std::string render_json(const AbsRes& r, int indent) { return set_json(r).dump(indent); }

AbsRes parse_result_json(const std::string& text, StackPool& pool) {
  return JsonReader(pool).set(json::parse(text));
}

// ---------------------------------------------------------------------------
// DOT
// ---------------------------------------------------------------------------

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

class DotWriter {
 public:
  std::string run(const AbsRes& r) {
    out_ << "digraph result {\n  node [shape=box, fontname=\"monospace\"];\n";
    for (const auto& a : r.atoms()) node(a, {});
    back_edges();
    out_ << "}\n";
    return out_.str();
  }

 private:
  std::string caption(const Atom& a) {
    switch (a->kind) {
      case AtomKind::Op: return std::string(to_string(a->op));
      case AtomKind::Record: return "record";
      case AtomKind::Proj: return "." + a->name;
      case AtomKind::Inspect: return a->name + " in";
      case AtomKind::Labeled: return "parent " + to_string(a->key);
      case AtomKind::Stub: return "stub " + to_string(a->key);
      case AtomKind::Guarded: return std::string("if = ") + (a->guard ? "true" : "false");
      default: return render_compact(a);
    }
  }

  std::vector<std::string> roles(const Atom& a) {
    switch (a->kind) {
      case AtomKind::Op: return {"lhs", "rhs"};
      case AtomKind::Record: return a->fields;
      case AtomKind::Guarded: return {"cond", "value"};
      default: return {""};
    }
  }

  struct Less {
    bool operator()(const Atom& a, const Atom& b) const { return compare(a, b) < 0; }
  };

  /// Emits the atom once (equal atoms share a node); returns its node id.
  std::size_t node(const Atom& a, std::vector<std::pair<ParentKey, std::size_t>> parents) {
    if (auto it = ids_.find(a); it != ids_.end()) return it->second;
    std::size_t id = next_++;
    ids_.emplace(a, id);
    out_ << "  n" << id << " [label=\"" << escape(caption(a)) << "\"";
    if (a->kind == AtomKind::Stub) out_ << ", style=dashed";
    out_ << "];\n";
    if (a->kind == AtomKind::Labeled) {
      parents.emplace_back(a->key, id);
      labeled_.emplace(a->key, id);
    }
    if (a->kind == AtomKind::Stub) {
      std::optional<std::size_t> target;
      for (auto it = parents.rbegin(); it != parents.rend() && !target; ++it) {
        if (it->first == a->key) target = it->second;
      }
      stubs_.emplace_back(id, a->key, target);
    }
    std::vector<std::string> rs = roles(a);
    for (std::size_t i = 0; i < a->parts.size(); ++i) {
      for (const auto& c : a->parts[i].atoms()) {
        std::size_t child = node(c, parents);
        out_ << "  n" << id << " -> n" << child;
        if (i < rs.size() && !rs[i].empty()) out_ << " [label=\"" << escape(rs[i]) << "\"]";
        out_ << ";\n";
      }
    }
    return id;
  }

  void back_edges() {
    for (const auto& [id, key, target] : stubs_) {
      std::optional<std::size_t> to = target;
      if (!to) {
        if (auto it = labeled_.find(key); it != labeled_.end()) to = it->second;
      }
      if (to) out_ << "  n" << id << " -> n" << *to << " [style=dashed, constraint=false];\n";
    }
  }

  std::map<Atom, std::size_t, Less> ids_;
  std::map<ParentKey, std::size_t> labeled_;
  std::vector<std::tuple<std::size_t, ParentKey, std::optional<std::size_t>>> stubs_;
  std::ostringstream out_;
  std::size_t next_ = 0;
};

}  // namespace

std::string render_dot(const AbsRes& r) { return DotWriter().run(r); }

}  // namespace pdemand
