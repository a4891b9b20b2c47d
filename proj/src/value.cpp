#include "pdemand/value.hpp"

#include <sstream>

namespace pdemand {

namespace {

std::shared_ptr<ResNode> fresh(ResKind kind) {
  auto n = std::make_shared<ResNode>();
  n->kind = kind;
  return n;
}

[[noreturn]] void mismatch(const std::string& what) { throw EvalError(EvalError::Kind::TypeMismatch, what); }

}  // namespace

ResVal make_fun(Label fun, Stack stack) {
  auto n = fresh(ResKind::Fun);
  n->fun = fun;
  n->stack = stack;
  return n;
}

ResVal make_int(BigInt v) {
  auto n = fresh(ResKind::Int);
  n->int_value = std::move(v);
  return n;
}

ResVal make_bool(bool b) {
  auto n = fresh(ResKind::Bool);
  n->bool_value = b;
  return n;
}

ResVal make_op(ResVal lhs, BinOp op, ResVal rhs) {
  auto n = fresh(ResKind::Op);
  n->op = op;
  n->children = {std::move(lhs), std::move(rhs)};
  return n;
}

ResVal make_record(std::vector<std::string> fields, std::vector<ResVal> values) {
  auto n = fresh(ResKind::Record);
  n->fields = std::move(fields);
  n->children = std::move(values);
  return n;
}

ResVal make_proj(ResVal record, std::string field) {
  auto n = fresh(ResKind::Proj);
  n->name = std::move(field);
  n->children = {std::move(record)};
  return n;
}

ResVal make_inspect(std::string field, ResVal record) {
  auto n = fresh(ResKind::Inspect);
  n->name = std::move(field);
  n->children = {std::move(record)};
  return n;
}

namespace {

void render_into(const ResVal& r, std::ostream& out) {
  switch (r->kind) {
    case ResKind::Fun:
      out << "<fun@" << r->fun.id << ' ' << to_string(r->stack) << '>';
      return;
    case ResKind::Int:
      out << r->int_value.str();
      return;
    case ResKind::Bool:
      out << (r->bool_value ? "true" : "false");
      return;
    case ResKind::Op:
      out << '(';
      render_into(r->children[0], out);
      out << ' ' << to_string(r->op) << ' ';
      render_into(r->children[1], out);
      out << ')';
      return;
    case ResKind::Record:
      out << '{';
      for (std::size_t i = 0; i < r->fields.size(); ++i) {
        if (i) out << "; ";
        out << r->fields[i] << " = ";
        render_into(r->children[i], out);
      }
      out << '}';
      return;
    case ResKind::Proj:
      out << '(';
      render_into(r->children[0], out);
      out << ")." << r->name;
      return;
    case ResKind::Inspect:
      out << '(' << r->name << " in ";
      render_into(r->children[0], out);
      out << ')';
      return;
  }
}

void render_into(const Value& v, std::ostream& out) {
  switch (v.kind) {
    case Value::Kind::Int:
      out << v.int_value.str();
      return;
    case Value::Kind::Bool:
      out << (v.bool_value ? "true" : "false");
      return;
    case Value::Kind::Fun:
      out << "<fun@" << v.fun.id << '>';
      return;
    case Value::Kind::Record:
      out << '{';
      for (std::size_t i = 0; i < v.fields.size(); ++i) {
        if (i) out << "; ";
        out << v.fields[i].first << " = ";
        render_into(v.fields[i].second, out);
      }
      out << '}';
      return;
  }
}

}  // namespace

std::string render(const ResVal& r) {
  std::ostringstream out;
  render_into(r, out);
  return out.str();
}

std::string render(const Value& v) {
  std::ostringstream out;
  render_into(v, out);
  return out.str();
}

Value Value::of_int(BigInt n) {
  Value v;
  v.kind = Kind::Int;
  v.int_value = std::move(n);
  return v;
}

Value Value::of_bool(bool b) {
  Value v;
  v.kind = Kind::Bool;
  v.bool_value = b;
  return v;
}

Value Value::of_fun(Label l) {
  Value v;
  v.kind = Kind::Fun;
  v.fun = l;
  return v;
}

Value Value::of_record(std::vector<std::pair<std::string, Value>> fields) {
  Value v;
  v.kind = Kind::Record;
  v.fields = std::move(fields);
  return v;
}

const Value* Value::field(const std::string& name) const {
  for (const auto& [n, v] : fields) {
    if (n == name) return &v;
  }
  return nullptr;
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Value::Kind::Int: return a.int_value == b.int_value;
    case Value::Kind::Bool: return a.bool_value == b.bool_value;
    case Value::Kind::Fun: return a.fun == b.fun;
    case Value::Kind::Record: return a.fields == b.fields;
  }
  return false;
}

bool operator<(const Value& a, const Value& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  switch (a.kind) {
    case Value::Kind::Int: return a.int_value < b.int_value;
    case Value::Kind::Bool: return a.bool_value < b.bool_value;
    case Value::Kind::Fun: return a.fun < b.fun;
    case Value::Kind::Record: return a.fields < b.fields;
  }
  return false;
}

Value apply_op(BinOp op, const Value& lhs, const Value& rhs) {
  using K = Value::Kind;
  auto ints = [&]() {
    if (lhs.kind != K::Int || rhs.kind != K::Int) {
      mismatch(std::string("operator ") + std::string(to_string(op)) + " expects integers, got " + render(lhs) +
               " and " + render(rhs));
    }
  };
  auto bools = [&]() {
    if (lhs.kind != K::Bool || rhs.kind != K::Bool) {
      mismatch(std::string("operator ") + std::string(to_string(op)) + " expects booleans, got " + render(lhs) +
               " and " + render(rhs));
    }
  };
  switch (op) {
    case BinOp::Add: ints(); return Value::of_int(lhs.int_value + rhs.int_value);
    case BinOp::Sub: ints(); return Value::of_int(lhs.int_value - rhs.int_value);
    case BinOp::Lt: ints(); return Value::of_bool(lhs.int_value < rhs.int_value);
    case BinOp::Le: ints(); return Value::of_bool(lhs.int_value <= rhs.int_value);
    case BinOp::Ge: ints(); return Value::of_bool(lhs.int_value >= rhs.int_value);
    case BinOp::And: bools(); return Value::of_bool(lhs.bool_value && rhs.bool_value);
    case BinOp::Or: bools(); return Value::of_bool(lhs.bool_value || rhs.bool_value);
    case BinOp::Xor: bools(); return Value::of_bool(lhs.bool_value != rhs.bool_value);
    case BinOp::Eq:
      if (lhs.kind == K::Int && rhs.kind == K::Int) return Value::of_bool(lhs.int_value == rhs.int_value);
      if (lhs.kind == K::Bool && rhs.kind == K::Bool) return Value::of_bool(lhs.bool_value == rhs.bool_value);
      mismatch("operator = expects two integers or two booleans, got " + render(lhs) + " and " + render(rhs));
  }
  mismatch("unknown operator");
}

namespace {

template <class Rec>
Value force_with(const ResVal& r, Rec&& rec) {
  switch (r->kind) {
    case ResKind::Fun: return Value::of_fun(r->fun);
    case ResKind::Int: return Value::of_int(r->int_value);
    case ResKind::Bool: return Value::of_bool(r->bool_value);
    case ResKind::Op: return apply_op(r->op, rec(r->children[0]), rec(r->children[1]));
    case ResKind::Record: {
      std::vector<std::pair<std::string, Value>> fs;
      fs.reserve(r->fields.size());
      for (std::size_t i = 0; i < r->fields.size(); ++i) fs.emplace_back(r->fields[i], rec(r->children[i]));
      return Value::of_record(std::move(fs));
    }
    case ResKind::Proj: {
      Value rv = rec(r->children[0]);
      if (rv.kind != Value::Kind::Record) mismatch("projection ." + r->name + " of non-record " + render(rv));
      const Value* f = rv.field(r->name);
      if (!f) mismatch("record " + render(rv) + " has no field " + r->name);
      return *f;
    }
    case ResKind::Inspect: {
      Value rv = rec(r->children[0]);
      if (rv.kind != Value::Kind::Record) mismatch("inspection of non-record " + render(rv));
      return Value::of_bool(rv.field(r->name) != nullptr);
    }
  }
  mismatch("unknown result");
}

}  // namespace

Value force(const ResVal& r) {
  return force_with(r, [](const ResVal& c) { return force(c); });
}

Value ForceCache::force(const ResVal& r) {
  if (auto it = memo_.find(r.get()); it != memo_.end()) {
    ++hits_;
    return it->second.second;
  }
  Value v = force_with(r, [this](const ResVal& c) { return this->force(c); });
  memo_.emplace(r.get(), std::make_pair(r, v));
  return v;
}

ResVal whnf(const ResVal& r) {
  switch (r->kind) {
    case ResKind::Fun:
    case ResKind::Int:
    case ResKind::Bool:
    case ResKind::Record:
      return r;
    case ResKind::Op: {
      Value v = force(r);
      return v.kind == Value::Kind::Int ? make_int(v.int_value) : make_bool(v.bool_value);
    }
    case ResKind::Proj: {
      ResVal rec = whnf(r->children[0]);
      if (rec->kind != ResKind::Record) mismatch("projection ." + r->name + " of non-record " + render(rec));
      for (std::size_t i = 0; i < rec->fields.size(); ++i) {
        if (rec->fields[i] == r->name) return whnf(rec->children[i]);
      }
      mismatch("record " + render(rec) + " has no field " + r->name);
    }
    case ResKind::Inspect: {
      ResVal rec = whnf(r->children[0]);
      if (rec->kind != ResKind::Record) mismatch("inspection of non-record " + render(rec));
      for (const auto& f : rec->fields) {
        if (f == r->name) return make_bool(true);
      }
      return make_bool(false);
    }
  }
  mismatch("unknown result");
}

}  // namespace pdemand
