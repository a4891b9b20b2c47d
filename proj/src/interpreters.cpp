#include "pdemand/interpreters.hpp"

#include <pthread.h>

#include <exception>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace pdemand {

namespace {

constexpr std::uint32_t kNoContext = 0xffffffffu;

[[noreturn]] void stuck(const std::string& message) { throw EvalError(EvalError::Kind::Stuck, message); }

// Fuel, recursion depth and tracing shared by every interpreter.
class Budget {
 public:
  Budget(const Program& program, const EvalOptions& options, EvalCounters& counters)
      : program_(program), options_(options), counters_(counters) {}

  void fire(const char* rule, NodeId node, const std::string& where, std::optional<Label> ctx = std::nullopt) {
    if (++counters_.rule_firings > options_.fuel) {
      throw EvalError(EvalError::Kind::FuelExhausted,
                      "after " + std::to_string(options_.fuel) + " rule firings at " + program_.node_tag(node) +
                          (where.empty() ? "" : ", stack " + where) + " (possible divergence)");
    }
    if (options_.trace) {
      *options_.trace << rule << '\t' << program_.node_tag(node);
      if (ctx && program_.node(node).label != ctx) *options_.trace << '^' << ctx->id;
      *options_.trace << '\t' << where << '\n';
    }
  }

  class Scope {
   public:
    explicit Scope(Budget& b) : b_(b) {
      if (++b_.depth_ > b_.options_.max_depth) {
        --b_.depth_;
        throw EvalError(EvalError::Kind::DepthExceeded,
                        "recursion depth limit " + std::to_string(b_.options_.max_depth) +
                            " exceeded (possible divergence)");
      }
    }
    ~Scope() { --b_.depth_; }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Budget& b_;
  };

  bool tracing() const { return options_.trace != nullptr; }

 private:
  const Program& program_;
  const EvalOptions& options_;
  EvalCounters& counters_;
  std::size_t depth_ = 0;
};

void require_core(const Program& program, const char* semantics) {
  if (!program.is_core()) {
    throw EvalError(EvalError::Kind::Unsupported,
                    std::string("unsupported in this semantics: ") + semantics +
                        " covers functions, applications and variables only");
  }
}

Label label_of(const Program& p, NodeId id) { return *p.node(id).label; }

// ---------------------------------------------------------------------------
// Pure demand
// ---------------------------------------------------------------------------

class DemandInterp {
 public:
  DemandInterp(const Program& p, StackPool& pool, const EvalOptions& o)
      : p_(p), pool_(pool), o_(o), budget_(p, o, counters_) {}

  DemandResult run() {
    ResVal v = eval(pool_.empty(), p_.root(), kNoContext);
    counters_.force_cache_hits = fc_.hits();
    return {std::move(v), counters_};
  }

 private:
  struct Key {
    const StackNode* stack;
    std::uint32_t node;
    std::uint32_t ctx;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::size_t h = std::hash<const void*>{}(k.stack);
      h ^= (std::size_t(k.node) << 1) * 0x9e3779b97f4a7c15ull;
      h ^= std::size_t(k.ctx) * 0xc2b2ae3d27d4eb4full + (h >> 7);
      return h;
    }
  };

  std::string where(Stack s) const { return budget_.tracing() ? to_string(s) : std::string(); }

  Value force_value(const ResVal& r) { return o_.cache ? fc_.force(r) : force(r); }

  ResVal eval(Stack s, NodeId n, std::uint32_t ctx) {
    const Node& node = p_.node(n);
    if (node.kind == NodeKind::Variable && ctx == kNoContext) ctx = node.label->id;
    if (!o_.cache) return eval_uncached(s, n, ctx);
    Key key{s.node(), n.index, ctx};
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++counters_.cache_hits;
      return it->second;
    }
    ++counters_.cache_misses;
    ResVal r = eval_uncached(s, n, ctx);
    if (!cache_.emplace(key, r).second) ++counters_.duplicate_evaluations;
    return r;
  }

  ResVal eval_uncached(Stack s, NodeId n, std::uint32_t ctx) {
    Budget::Scope scope(budget_);
    const Node& node = p_.node(n);
    switch (node.kind) {
      case NodeKind::Function:
        budget_.fire("ValueFun", n, where(s));
        return make_fun(*node.label, s);
      case NodeKind::IntLit:
        budget_.fire("Value", n, where(s));
        return make_int(node.int_value);
      case NodeKind::BoolLit:
        budget_.fire("Value", n, where(s));
        return make_bool(node.bool_value);
      case NodeKind::Variable:
        return eval_var(s, n, Label{ctx});
      case NodeKind::BinaryOp: {
        budget_.fire("Operation", n, where(s));
        ResVal lhs = eval(s, node.children[0], kNoContext);
        ResVal rhs = eval(s, node.children[1], kNoContext);
        if (o_.fault == Fault::DemandAddOffByOne && node.op == BinOp::Add) {
          return make_op(make_op(lhs, node.op, rhs), BinOp::Add, make_int(1));
        }
        return make_op(lhs, node.op, rhs);
      }
      case NodeKind::Record: {
        budget_.fire("RecordValue", n, where(s));
        std::vector<ResVal> values;
        values.reserve(node.children.size());
        for (NodeId c : node.children) values.push_back(eval(s, c, kNoContext));
        return make_record(node.fields, std::move(values));
      }
      case NodeKind::Projection: {
        budget_.fire("RecordProject", n, where(s));
        ResVal rec = whnf(eval(s, node.children[0], kNoContext));
        if (rec->kind != ResKind::Record) stuck("projection ." + node.name + " of non-record " + render(rec));
        bool present = false;
        for (const auto& f : rec->fields) present = present || f == node.name;
        if (!present) stuck("record " + render(rec) + " has no field " + node.name);
        return make_proj(rec, node.name);
      }
      case NodeKind::Inspection: {
        budget_.fire("RecordInspect", n, where(s));
        ResVal rec = whnf(eval(s, node.children[0], kNoContext));
        if (rec->kind != ResKind::Record) stuck("inspection of non-record " + render(rec));
        return make_inspect(node.name, rec);
      }
      case NodeKind::Conditional: {
        budget_.fire("Conditional", n, where(s));
        Value g = force_value(eval(s, node.children[0], kNoContext));
        if (g.kind != Value::Kind::Bool) stuck("conditional guard is not a boolean: " + render(g));
        return eval(s, node.children[g.bool_value ? 1 : 2], kNoContext);
      }
      case NodeKind::LetAssert:
        budget_.fire("LetAssert", n, where(s));
        return eval(s, node.children[0], kNoContext);
      case NodeKind::Application: {
        budget_.fire("Application", n, where(s));
        ++counters_.app_firings;
        ResVal f = whnf(eval(s, node.children[0], kNoContext));
        if (f->kind != ResKind::Fun) {
          stuck("application " + p_.node_tag(n) + " calls non-function " + render(f) + " at stack " + to_string(s));
        }
        if (!o_.skip_arg) eval(s, node.children[1], kNoContext);
        NodeId body = p_.node(p_.node_of(f->fun)).children[0];
        return eval(pool_.push(*node.label, s), body, kNoContext);
      }
    }
    stuck("unknown node");
  }

  ResVal eval_var(Stack s, NodeId n, Label ctx) {
    const Node& var = p_.node(n);
    if (s.empty()) {
      stuck("variable " + var.name + " (label " + std::to_string(ctx.id) + ") looked up with an empty stack");
    }
    auto f = p_.my_fun(p_.node_of(ctx));
    if (!f) stuck("variable " + var.name + " has no enclosing function at label " + std::to_string(ctx.id));
    NodeId app = p_.node_of(s.head());
    const Node& call = p_.node(app);
    Stack rest = s.tail();
    if (p_.node(*f).name == var.name) {
      budget_.fire("VarLocal", n, where(s), ctx);
      ++counters_.var_local;
      return eval(rest, call.children[1], kNoContext);
    }
    budget_.fire("VarNonLocal", n, where(s), ctx);
    ++counters_.var_nonlocal;
    ++counters_.nonlocal_reevaluations;
    ResVal caller = whnf(eval(rest, call.children[0], kNoContext));
    Label expected = label_of(p_, *f);
    if (caller->kind != ResKind::Fun || caller->fun != expected) {
      stuck("variable " + var.name + ": frame " + std::to_string(s.head().id) + " does not call function " +
            std::to_string(expected.id) + " (got " + render(caller) + ")");
    }
    return eval(caller->stack, n, expected.id);
  }

  const Program& p_;
  StackPool& pool_;
  const EvalOptions& o_;
  EvalCounters counters_;
  Budget budget_;
  ForceCache fc_;
  std::unordered_map<Key, ResVal, KeyHash> cache_;
};

// ---------------------------------------------------------------------------
// Environment / closure
// ---------------------------------------------------------------------------

using EnvPtr = std::shared_ptr<const EnvValue>;

class EnvInterp {
 public:
  EnvInterp(const Program& p, const EvalOptions& o) : p_(p), o_(o), budget_(p, o, counters_) {}

  EnvResult run() {
    EnvPtr v = eval(nullptr, p_.root());
    return {*v, counters_};
  }

 private:
  std::string where(const Env& e) const { return budget_.tracing() ? render_env(e) : std::string(); }

  static EnvPtr of_value(const Value& v) {
    auto out = std::make_shared<EnvValue>();
    switch (v.kind) {
      case Value::Kind::Int:
        out->kind = EnvValue::Kind::Int;
        out->int_value = v.int_value;
        break;
      case Value::Kind::Bool:
        out->kind = EnvValue::Kind::Bool;
        out->bool_value = v.bool_value;
        break;
      default:
        stuck("operator produced a non-scalar");
    }
    return out;
  }

  EnvPtr eval(const Env& env, NodeId n) {
    Budget::Scope scope(budget_);
    const Node& node = p_.node(n);
    switch (node.kind) {
      case NodeKind::Function: {
        budget_.fire("Value", n, where(env));
        auto v = std::make_shared<EnvValue>();
        v->kind = EnvValue::Kind::Closure;
        v->fun = *node.label;
        v->env = env;
        return v;
      }
      case NodeKind::IntLit:
      case NodeKind::BoolLit: {
        budget_.fire("Value", n, where(env));
        auto v = std::make_shared<EnvValue>();
        v->kind = node.kind == NodeKind::IntLit ? EnvValue::Kind::Int : EnvValue::Kind::Bool;
        v->int_value = node.int_value;
        v->bool_value = node.bool_value;
        return v;
      }
      case NodeKind::Variable: {
        budget_.fire("Var", n, where(env));
        ++counters_.var_local;
        for (const EnvCell* c = env.get(); c; c = c->next.get()) {
          if (c->name == node.name) return c->value;
        }
        stuck("unbound variable " + node.name + " in environment " + render_env(env));
      }
      case NodeKind::BinaryOp: {
        budget_.fire("Operation", n, where(env));
        EnvPtr a = eval(env, node.children[0]);
        EnvPtr b = eval(env, node.children[1]);
        return of_value(apply_op(node.op, to_value(*a), to_value(*b)));
      }
      case NodeKind::Record: {
        budget_.fire("RecordValue", n, where(env));
        auto v = std::make_shared<EnvValue>();
        v->kind = EnvValue::Kind::Record;
        for (std::size_t i = 0; i < node.fields.size(); ++i) {
          v->fields.emplace_back(node.fields[i], eval(env, node.children[i]));
        }
        return v;
      }
      case NodeKind::Projection: {
        budget_.fire("RecordProject", n, where(env));
        EnvPtr r = eval(env, node.children[0]);
        if (r->kind != EnvValue::Kind::Record) stuck("projection ." + node.name + " of non-record");
        for (const auto& [name, value] : r->fields) {
          if (name == node.name) return value;
        }
        stuck("record has no field " + node.name);
      }
      case NodeKind::Inspection: {
        budget_.fire("RecordInspect", n, where(env));
        EnvPtr r = eval(env, node.children[0]);
        if (r->kind != EnvValue::Kind::Record) stuck("inspection of non-record");
        bool present = false;
        for (const auto& f : r->fields) present = present || f.first == node.name;
        return of_value(Value::of_bool(present));
      }
      case NodeKind::Conditional: {
        budget_.fire("Conditional", n, where(env));
        EnvPtr g = eval(env, node.children[0]);
        if (g->kind != EnvValue::Kind::Bool) stuck("conditional guard is not a boolean");
        return eval(env, node.children[g->bool_value ? 1 : 2]);
      }
      case NodeKind::LetAssert:
        budget_.fire("LetAssert", n, where(env));
        return eval(env, node.children[0]);
      case NodeKind::Application: {
        budget_.fire("Application", n, where(env));
        ++counters_.app_firings;
        EnvPtr f = eval(env, node.children[0]);
        if (f->kind != EnvValue::Kind::Closure) stuck("application " + p_.node_tag(n) + " calls a non-function");
        EnvPtr arg = o_.skip_arg ? EnvPtr(std::make_shared<EnvValue>()) : eval(env, node.children[1]);
        const Node& fn = p_.node(p_.node_of(f->fun));
        auto cell = std::make_shared<EnvCell>();
        cell->name = fn.name;
        cell->value = arg;
        cell->next = f->env;
        return eval(cell, fn.children[0]);
      }
    }
    stuck("unknown node");
  }

  const Program& p_;
  const EvalOptions& o_;
  EvalCounters counters_;
  Budget budget_;
};

// ---------------------------------------------------------------------------
// Chaining
// ---------------------------------------------------------------------------

class ChainInterp {
 public:
  ChainInterp(const Program& p, StackPool& pool, const EvalOptions& o)
      : p_(p), pool_(pool), o_(o), budget_(p, o, counters_) {}

  ChainResult run() {
    ResVal v = eval(pool_.empty(), p_.root());
    return {std::move(v), counters_};
  }

 private:
  std::string where(Stack s) const { return budget_.tracing() ? to_string(s) : std::string(); }

  ResVal eval(Stack s, NodeId n) {
    Budget::Scope scope(budget_);
    const Node& node = p_.node(n);
    switch (node.kind) {
      case NodeKind::Function:
        budget_.fire("Value", n, where(s));
        return make_fun(*node.label, s);
      case NodeKind::IntLit:
        budget_.fire("Value", n, where(s));
        return make_int(node.int_value);
      case NodeKind::BoolLit:
        budget_.fire("Value", n, where(s));
        return make_bool(node.bool_value);
      case NodeKind::Variable: {
        budget_.fire("Var", n, where(s));
        // Σ'_i = (e_i e'_i) :: Σ_i; e_i must produce a function with
        // parameter x_i; the chain ends at the first x_i equal to x.
        Stack cur = s;
        while (true) {
          if (cur.empty()) stuck("variable " + node.name + " looked up with an empty stack");
          const Node& call = p_.node(p_.node_of(cur.head()));
          ResVal f = eval(cur.tail(), call.children[0]);
          if (f->kind != ResKind::Fun) stuck("frame " + std::to_string(cur.head().id) + " calls a non-function");
          if (p_.node(p_.node_of(f->fun)).name == node.name) {
            ++counters_.var_local;
            return eval(cur.tail(), call.children[1]);
          }
          ++counters_.var_nonlocal;
          cur = f->stack;
        }
      }
      case NodeKind::Application: {
        budget_.fire("Application", n, where(s));
        ++counters_.app_firings;
        ResVal f = eval(s, node.children[0]);
        if (f->kind != ResKind::Fun) stuck("application " + p_.node_tag(n) + " calls non-function " + render(f));
        if (!o_.skip_arg) eval(s, node.children[1]);
        NodeId body = p_.node(p_.node_of(f->fun)).children[0];
        return eval(pool_.push(*node.label, s), body);
      }
      default:
        throw EvalError(EvalError::Kind::Unsupported, "unsupported in this semantics");
    }
  }

  const Program& p_;
  StackPool& pool_;
  const EvalOptions& o_;
  EvalCounters counters_;
  Budget budget_;
};

// ---------------------------------------------------------------------------
// Displays
// ---------------------------------------------------------------------------

class DisplayInterp {
 public:
  DisplayInterp(const Program& p, const EvalOptions& o) : p_(p), o_(o), budget_(p, o, counters_) {}

  DisplayResult run() {
    DisplayValue v = eval(nullptr, p_.root());
    return {std::move(v), counters_};
  }

 private:
  std::string where(const Display& d) const { return budget_.tracing() ? render_display(d) : std::string(); }

  DisplayValue eval(const Display& d, NodeId n) {
    Budget::Scope scope(budget_);
    const Node& node = p_.node(n);
    switch (node.kind) {
      case NodeKind::Function:
        budget_.fire("Value", n, where(d));
        return DisplayValue{std::nullopt, *node.label, d};
      case NodeKind::IntLit:
        budget_.fire("Value", n, where(d));
        return DisplayValue{Value::of_int(node.int_value), Label{}, nullptr};
      case NodeKind::BoolLit:
        budget_.fire("Value", n, where(d));
        return DisplayValue{Value::of_bool(node.bool_value), Label{}, nullptr};
      case NodeKind::Variable: {
        budget_.fire("Var", n, where(d));
        auto m = p_.depth_of(n);
        if (!m) throw EvalError(EvalError::Kind::Stuck, "malformed depth for variable " + node.name);
        const DisplayCell* f = d.get();
        for (std::size_t i = 0; i < *m && f; ++i) f = f->next.get();
        if (!f) stuck("display too short for " + node.name + "^" + std::to_string(*m));
        ++counters_.var_local;
        return eval(f->saved, p_.node(p_.node_of(f->app)).children[1]);
      }
      case NodeKind::Application: {
        budget_.fire("Application", n, where(d));
        ++counters_.app_firings;
        DisplayValue f = eval(d, node.children[0]);
        if (f.literal) stuck("application " + p_.node_tag(n) + " calls non-function " + render(*f.literal));
        if (!o_.skip_arg) eval(d, node.children[1]);
        auto frame = std::make_shared<DisplayCell>();
        frame->app = *node.label;
        frame->saved = d;
        frame->next = f.display;
        return eval(frame, p_.node(p_.node_of(f.fun)).children[0]);
      }
      default:
        throw EvalError(EvalError::Kind::Unsupported, "unsupported in this semantics");
    }
  }

  const Program& p_;
  const EvalOptions& o_;
  EvalCounters counters_;
  Budget budget_;
};

// ---------------------------------------------------------------------------
// Optimized frames
// ---------------------------------------------------------------------------

struct OptValue {
  std::optional<Value> literal;
  Label fun;
  OptStack stack;
};

std::string render_opt(const OptStack& s) {
  std::ostringstream out;
  out << '[';
  for (const OptCell* c = s.get(); c; c = c->next.get()) {
    if (c != s.get()) out << ',';
    out << '<' << c->app.id << ',' << c->fun.id << '/' << render_opt(c->fun_stack) << '>';
  }
  out << ']';
  return out.str();
}

class OptInterp {
 public:
  OptInterp(const Program& p, StackPool& pool, const EvalOptions& o)
      : p_(p), pool_(pool), o_(o), budget_(p, o, counters_) {}

  OptResult run() {
    OptValue v = eval(nullptr, p_.root());
    OptResult out;
    out.literal = v.literal;
    out.fun = v.fun;
    out.stack = v.stack;
    if (v.literal) {
      out.as_demand = v.literal->kind == Value::Kind::Int ? make_int(v.literal->int_value)
                                                         : make_bool(v.literal->bool_value);
    } else {
      out.as_demand = make_fun(v.fun, to_stack(v.stack));
    }
    out.counters = counters_;
    return out;
  }

 private:
  Stack to_stack(const OptStack& s) {
    std::vector<Label> ls;
    for (const OptCell* c = s.get(); c; c = c->next.get()) ls.push_back(c->app);
    return pool_.from(ls);
  }

  std::string where(const OptStack& s) const { return budget_.tracing() ? render_opt(s) : std::string(); }

  OptValue eval(const OptStack& s, NodeId n) {
    Budget::Scope scope(budget_);
    const Node& node = p_.node(n);
    switch (node.kind) {
      case NodeKind::Function:
        budget_.fire("Value", n, where(s));
        return OptValue{std::nullopt, *node.label, s};
      case NodeKind::IntLit:
        budget_.fire("Value", n, where(s));
        return OptValue{Value::of_int(node.int_value), Label{}, nullptr};
      case NodeKind::BoolLit:
        budget_.fire("Value", n, where(s));
        return OptValue{Value::of_bool(node.bool_value), Label{}, nullptr};
      case NodeKind::Variable: {
        // Var Non-Local reads the caller's value from the frame: no
        // re-evaluation, just a walk outwards through the carried stacks.
        Label ctx = *node.label;
        OptStack cur = s;
        while (true) {
          if (!cur) stuck("variable " + node.name + " looked up with an empty stack");
          auto f = p_.my_fun(p_.node_of(ctx));
          if (!f) stuck("variable " + node.name + " has no enclosing function at label " + std::to_string(ctx.id));
          if (p_.node(*f).name == node.name) {
            budget_.fire("VarLocal", n, where(cur), ctx);
            ++counters_.var_local;
            return eval(cur->next, p_.node(p_.node_of(cur->app)).children[1]);
          }
          budget_.fire("VarNonLocal", n, where(cur), ctx);
          ++counters_.var_nonlocal;
          Label expected = label_of(p_, *f);
          if (cur->fun != expected) {
            stuck("variable " + node.name + ": frame " + std::to_string(cur->app.id) + " does not call function " +
                  std::to_string(expected.id));
          }
          ctx = cur->fun;
          cur = cur->fun_stack;
        }
      }
      case NodeKind::Application: {
        budget_.fire("Application", n, where(s));
        ++counters_.app_firings;
        OptValue f = eval(s, node.children[0]);
        if (f.literal) stuck("application " + p_.node_tag(n) + " calls non-function " + render(*f.literal));
        if (!o_.skip_arg) eval(s, node.children[1]);
        auto frame = std::make_shared<OptCell>();
        frame->app = *node.label;
        frame->fun = f.fun;
        frame->fun_stack = f.stack;
        frame->next = s;
        return eval(frame, p_.node(p_.node_of(f.fun)).children[0]);
      }
      default:
        throw EvalError(EvalError::Kind::Unsupported, "unsupported in this semantics");
    }
  }

  const Program& p_;
  StackPool& pool_;
  const EvalOptions& o_;
  EvalCounters counters_;
  Budget budget_;
};

// Predicates see only their binder.
Value eval_pred_node(const Program& p, NodeId n, const std::string& binder, const Value& bound) {
  const Node& node = p.node(n);
  switch (node.kind) {
    case NodeKind::IntLit: return Value::of_int(node.int_value);
    case NodeKind::BoolLit: return Value::of_bool(node.bool_value);
    case NodeKind::Variable:
      if (node.name != binder) stuck("predicate refers to " + node.name);
      return bound;
    case NodeKind::BinaryOp:
      return apply_op(node.op, eval_pred_node(p, node.children[0], binder, bound),
                      eval_pred_node(p, node.children[1], binder, bound));
    case NodeKind::Conditional: {
      Value g = eval_pred_node(p, node.children[0], binder, bound);
      if (g.kind != Value::Kind::Bool) stuck("conditional guard is not a boolean");
      return eval_pred_node(p, node.children[g.bool_value ? 1 : 2], binder, bound);
    }
    case NodeKind::Projection: {
      Value r = eval_pred_node(p, node.children[0], binder, bound);
      const Value* f = r.kind == Value::Kind::Record ? r.field(node.name) : nullptr;
      if (!f) stuck("projection ." + node.name + " failed in predicate");
      return *f;
    }
    case NodeKind::Inspection: {
      Value r = eval_pred_node(p, node.children[0], binder, bound);
      if (r.kind != Value::Kind::Record) stuck("inspection of non-record in predicate");
      return Value::of_bool(r.field(node.name) != nullptr);
    }
    default:
      throw EvalError(EvalError::Kind::Unsupported, "unsupported construct in letassert predicate");
  }
}

}  // namespace

template <class R, class F>
R on_large_stack(F&& f) {
  std::optional<R> out;
  run_with_large_stack([&] { out.emplace(f()); });
  return std::move(*out);
}

DemandResult eval_demand(const Program& program, StackPool& pool, const EvalOptions& options) {
  return on_large_stack<DemandResult>([&] { return DemandInterp(program, pool, options).run(); });
}

EnvResult eval_env(const Program& program, const EvalOptions& options) {
  return on_large_stack<EnvResult>([&] { return EnvInterp(program, options).run(); });
}

ChainResult eval_chain(const Program& program, StackPool& pool, const EvalOptions& options) {
  require_core(program, "chaining");
  return on_large_stack<ChainResult>([&] { return ChainInterp(program, pool, options).run(); });
}

DisplayResult eval_display(const Program& program, const EvalOptions& options) {
  require_core(program, "displays");
  return on_large_stack<DisplayResult>([&] { return DisplayInterp(program, options).run(); });
}

OptResult eval_optimized(const Program& program, StackPool& pool, const EvalOptions& options) {
  require_core(program, "optimized frames");
  return on_large_stack<OptResult>([&] { return OptInterp(program, pool, options).run(); });
}

Value to_value(const EnvValue& v) {
  switch (v.kind) {
    case EnvValue::Kind::Closure: return Value::of_fun(v.fun);
    case EnvValue::Kind::Int: return Value::of_int(v.int_value);
    case EnvValue::Kind::Bool: return Value::of_bool(v.bool_value);
    case EnvValue::Kind::Record: {
      std::vector<std::pair<std::string, Value>> fs;
      for (const auto& [n, f] : v.fields) fs.emplace_back(n, to_value(*f));
      return Value::of_record(std::move(fs));
    }
  }
  return Value();
}

std::string render_env(const Env& env) {
  std::ostringstream out;
  out << '[';
  for (const EnvCell* c = env.get(); c; c = c->next.get()) {
    if (c != env.get()) out << ", ";
    out << c->name << " -> " << render(to_value(*c->value));
  }
  out << ']';
  return out.str();
}

std::string render_display(const Display& d) {
  std::ostringstream out;
  out << '[';
  for (const DisplayCell* c = d.get(); c; c = c->next.get()) {
    if (c != d.get()) out << ',';
    out << '(' << c->app.id << ')' << render_display(c->saved);
  }
  out << ']';
  return out.str();
}

bool eval_predicate(const Program& program, NodeId letassert, const Value& bound) {
  const Node& la = program.node(letassert);
  if (la.kind != NodeKind::LetAssert) throw ProgramQueryError("node is not a letassert");
  Value v = eval_pred_node(program, la.children[1], la.name, bound);
  if (v.kind != Value::Kind::Bool) stuck("letassert predicate is not boolean");
  return v.bool_value;
}

namespace {

struct ThreadJob {
  const std::function<void()>* fn;
  std::exception_ptr error;
};

void* thread_main(void* arg) {
  auto* job = static_cast<ThreadJob*>(arg);
  try {
    (*job->fn)();
  } catch (...) {
    job->error = std::current_exception();
  }
  return nullptr;
}

}  // namespace

void run_with_large_stack(const std::function<void()>& fn, std::size_t bytes) {
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, bytes);
  ThreadJob job{&fn, nullptr};
  pthread_t thread;
  if (pthread_create(&thread, &attr, &thread_main, &job) != 0) {
    pthread_attr_destroy(&attr);
    fn();
    return;
  }
  pthread_join(thread, nullptr);
  pthread_attr_destroy(&attr);
  if (job.error) std::rethrow_exception(job.error);
}

}  // namespace pdemand
