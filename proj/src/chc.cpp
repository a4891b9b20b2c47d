#include "pdemand/chc.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

#include "pdemand/interpreters.hpp"

namespace pdemand {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Verified: return "Verified";
    case Verdict::RefutedOrUnknown: return "RefutedOrUnknown";
    case Verdict::SolverUnavailable: return "SolverUnavailable";
    case Verdict::Timeout: return "Timeout";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Translation
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kClauseCap = 1000000;

class Translator {
 public:
  ChcSystem run(const AbsRes& r) {
    sys_.root = set_pred(r, {}, {}, std::nullopt, "root");
    finish_sorts();
    for (const auto& [k, p] : key_pred_) sys_.parent_preds.emplace_back(k, p);
    return std::move(sys_);
  }

 private:
  using Conds = std::vector<std::pair<std::size_t, bool>>;
  enum : int { kUnknown = -1, kInt = 0, kBool = 1 };

  std::size_t new_pred(std::string origin) {
    sys_.origins.push_back(std::move(origin));
    parent_.push_back(parent_.size());
    sort_.push_back(kUnknown);
    return parent_.size() - 1;
  }

  std::size_t find(std::size_t p) {
    while (parent_[p] != p) p = parent_[p] = parent_[parent_[p]];
    return p;
  }

  void fix(std::size_t p, int sort) {
    std::size_t r = find(p);
    if (sort_[r] == kUnknown) {
      sort_[r] = sort;
    } else if (sort_[r] != sort) {
      throw ChcError("sort conflict at " + sys_.origins[p] + ": used as both Int and Bool");
    }
  }

  void unify(std::size_t a, std::size_t b) {
    std::size_t ra = find(a), rb = find(b);
    if (ra == rb) return;
    int sa = sort_[ra], sb = sort_[rb];
    if (sa != kUnknown && sb != kUnknown && sa != sb) {
      throw ChcError("sort conflict between " + sys_.origins[a] + " and " + sys_.origins[b]);
    }
    parent_[rb] = ra;
    if (sa == kUnknown) sort_[ra] = sb;
  }

  void finish_sorts() {
    sys_.sorts.resize(parent_.size());
    for (std::size_t i = 0; i < parent_.size(); ++i) sys_.sorts[i] = sort_[find(i)] == kBool ? Sort::Bool : Sort::Int;
  }

  void add(Clause c) {
    if (sys_.clauses.size() >= kClauseCap) throw ChcError("clause limit exceeded");
    sys_.clauses.push_back(std::move(c));
  }

  /// Body atoms and guards of Cond(pi), starting at variable `first`.
  void conds(Clause& c, const Conds& pi) {
    for (const auto& [pred, b] : pi) {
      std::size_t v = c.var_count++;
      c.body.push_back({pred, v});
      c.guards.emplace_back(v, b);
    }
  }

  std::size_t key_pred(const ParentKey& k) {
    auto it = key_pred_.find(k);
    if (it != key_pred_.end()) return it->second;
    std::size_t p = new_pred("parent " + to_string(k));
    key_pred_.emplace(k, p);
    return p;
  }

  std::size_t set_pred(const AbsRes& r, const Conds& pi, const std::set<ParentKey>& P, std::optional<std::size_t> forced,
                       const std::string& origin) {
    std::size_t id = forced ? *forced : new_pred(origin);
    for (const auto& a : r.atoms()) {
      std::size_t aid = atom_pred(a, pi, P);
      unify(id, aid);
      Clause c;
      c.var_count = 1;
      c.body.push_back({aid, 0});
      conds(c, pi);
      c.head = id;
      c.head_term.kind = Term::Kind::Var;
      c.head_term.var = 0;
      add(std::move(c));
    }
    return id;
  }

  std::size_t atom_pred(const Atom& a, const Conds& pi, const std::set<ParentKey>& P) {
    switch (a->kind) {
      case AtomKind::Fun: return new_pred(render_compact(a));
      case AtomKind::Int:
      case AtomKind::Bool: {
        std::size_t p = new_pred(render_compact(a));
        fix(p, a->kind == AtomKind::Int ? kInt : kBool);
        Clause c;
        conds(c, pi);
        c.head = p;
        c.head_term.kind = a->kind == AtomKind::Int ? Term::Kind::Int : Term::Kind::Bool;
        c.head_term.int_value = a->int_value;
        c.head_term.bool_value = a->bool_value;
        add(std::move(c));
        return p;
      }
      case AtomKind::Op: {
        std::size_t l = set_pred(a->parts[0], pi, P, std::nullopt, "lhs of " + std::string(to_string(a->op)));
        std::size_t r = set_pred(a->parts[1], pi, P, std::nullopt, "rhs of " + std::string(to_string(a->op)));
        std::size_t p = new_pred("operator " + std::string(to_string(a->op)));
        switch (a->op) {
          case BinOp::Add:
          case BinOp::Sub: fix(l, kInt), fix(r, kInt), fix(p, kInt); break;
          case BinOp::Lt:
          case BinOp::Le:
          case BinOp::Ge: fix(l, kInt), fix(r, kInt), fix(p, kBool); break;
          case BinOp::And:
          case BinOp::Or:
          case BinOp::Xor: fix(l, kBool), fix(r, kBool), fix(p, kBool); break;
          case BinOp::Eq: unify(l, r), fix(p, kBool); break;
        }
        Clause c;
        c.var_count = 2;
        c.body.push_back({l, 0});
        c.body.push_back({r, 1});
        conds(c, pi);
        c.head = p;
        c.head_term.kind = Term::Kind::Op;
        c.head_term.op = a->op;
        c.head_term.lhs = 0;
        c.head_term.rhs = 1;
        add(std::move(c));
        return p;
      }
      case AtomKind::Labeled: {
        std::size_t p = key_pred(a->key);
        std::set<ParentKey> inner = P;
        inner.insert(a->key);
        set_pred(a->parts[0], pi, inner, p, "");
        return p;
      }
      case AtomKind::Stub: {
        std::size_t p = key_pred(a->key);
        if (!P.count(a->key)) {
          // open stub: any value
          Clause c;
          c.var_count = 1;
          c.head = p;
          c.head_term.kind = Term::Kind::Var;
          c.head_term.var = 0;
          add(std::move(c));
        }
        return p;
      }
      case AtomKind::Guarded: {
        std::size_t cp = set_pred(a->parts[0], pi, P, std::nullopt, "path condition");
        fix(cp, kBool);
        Conds inner = pi;
        inner.emplace_back(cp, a->guard);
        return set_pred(a->parts[1], inner, P, std::nullopt, "guarded value");
      }
      case AtomKind::Record:
      case AtomKind::Proj:
      case AtomKind::Inspect:
        throw ChcError("no clause encoding for " + std::string(to_string(a->kind)) + " " + render_compact(a));
    }
    throw ChcError("unknown atom");
  }

  ChcSystem sys_;
  std::vector<std::size_t> parent_;
  std::vector<int> sort_;
  std::map<ParentKey, std::size_t> key_pred_;
};

std::string sort_name(Sort s) { return s == Sort::Bool ? "Bool" : "Int"; }

std::string smt_int(const BigInt& n) { return n < 0 ? "(- " + BigInt(-n).str() + ")" : n.str(); }

std::string smt_op(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Eq: return "=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
    case BinOp::Xor: return "xor";
  }
  return "?";
}

std::string var(std::size_t i) { return "x" + std::to_string(i); }

std::string pred(std::size_t i) { return "X_" + std::to_string(i); }

}  // namespace

ChcSystem to_chc(const AbsRes& r) { return Translator().run(r); }

std::string emit_smtlib(const ChcSystem& system, const std::optional<Query>& query) {
  std::ostringstream out;
  out << "(set-logic HORN)\n";
  for (std::size_t i = 0; i < system.sorts.size(); ++i) {
    out << "(declare-fun " << pred(i) << " (" << sort_name(system.sorts[i]) << ") Bool)\n";
  }
  for (const auto& c : system.clauses) {
    std::vector<Sort> vs(c.var_count, Sort::Int);
    for (const auto& b : c.body) vs[b.var] = system.sorts[b.pred];
    if (c.head_term.kind == Term::Kind::Var && c.body.empty()) vs[c.head_term.var] = system.sorts[c.head];

    std::vector<std::string> conj;
    for (const auto& b : c.body) conj.push_back("(" + pred(b.pred) + " " + var(b.var) + ")");
    for (const auto& [v, b] : c.guards) conj.push_back(std::string("(= ") + var(v) + (b ? " true)" : " false)"));

    std::string term;
    switch (c.head_term.kind) {
      case Term::Kind::Var: term = var(c.head_term.var); break;
      case Term::Kind::Int: term = smt_int(c.head_term.int_value); break;
      case Term::Kind::Bool: term = c.head_term.bool_value ? "true" : "false"; break;
      case Term::Kind::Op:
        term = "(" + smt_op(c.head_term.op) + " " + var(c.head_term.lhs) + " " + var(c.head_term.rhs) + ")";
        break;
    }
    std::string head = "(" + pred(c.head) + " " + term + ")";
    std::string body;
    if (conj.size() == 1) body = conj[0];
    if (conj.size() > 1) {
      body = "(and";
      for (const auto& s : conj) body += " " + s;
      body += ")";
    }
    std::string formula = body.empty() ? head : "(=> " + body + " " + head + ")";
    if (c.var_count == 0) {
      out << "(assert " << formula << ")\n";
    } else {
      out << "(assert (forall (";
      for (std::size_t i = 0; i < c.var_count; ++i) out << (i ? " " : "") << "(" << var(i) << " " << sort_name(vs[i]) << ")";
      out << ") " << formula << "))\n";
    }
  }
  if (query) {
    out << "(assert (forall ((q " << sort_name(system.sorts.at(query->pred)) << ")) (=> (and (" << pred(query->pred)
        << " q) " << query->constraint << ") false)))\n";
  }
  out << "(check-sat)\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Solving
// ---------------------------------------------------------------------------

std::optional<SolverConfig> solver_from_env() {
  const char* p = std::getenv("PDEMAND_SOLVER");
  if (!p || !*p) return std::nullopt;
  return SolverConfig{p, 10000};
}

SolveResult solve(const ChcSystem& system, const std::optional<Query>& query, const SolverConfig& solver) {
  auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  SolveResult out;
  if (solver.timeout_ms == 0) {
    out.verdict = Verdict::Timeout;
    out.detail = "zero timeout";
    return out;
  }
  if (solver.path.empty() || access(solver.path.c_str(), X_OK) != 0) {
    out.verdict = Verdict::SolverUnavailable;
    out.detail = "solver not executable: " + solver.path;
    return out;
  }

  char name[] = "/tmp/pdemand-chc-XXXXXX";
  int fd = mkstemp(name);
  if (fd < 0) {
    out.verdict = Verdict::SolverUnavailable;
    out.detail = std::string("cannot create temporary file: ") + std::strerror(errno);
    return out;
  }
  std::string text = emit_smtlib(system, query);
  std::string smt_name = std::string(name) + ".smt2";
  bool wrote = write(fd, text.data(), text.size()) == static_cast<ssize_t>(text.size());
  close(fd);
  if (!wrote || std::rename(name, smt_name.c_str()) != 0) {
    unlink(name);
    out.verdict = Verdict::SolverUnavailable;
    out.detail = "cannot write query file";
    return out;
  }

  int pipefd[2];
  if (pipe(pipefd) != 0) {
    unlink(smt_name.c_str());
    out.verdict = Verdict::SolverUnavailable;
    out.detail = "pipe failed";
    return out;
  }
  pid_t pid = fork();
  if (pid == 0) {
    dup2(pipefd[1], STDOUT_FILENO);
    dup2(pipefd[1], STDERR_FILENO);
    close(pipefd[0]);
    close(pipefd[1]);
    execl(solver.path.c_str(), solver.path.c_str(), smt_name.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(pipefd[1]);
  if (pid < 0) {
    close(pipefd[0]);
    unlink(smt_name.c_str());
    out.verdict = Verdict::SolverUnavailable;
    out.detail = "fork failed";
    return out;
  }

  std::string output;
  bool timed_out = false;
  auto deadline = start + std::chrono::milliseconds(solver.timeout_ms);
  while (true) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{pipefd[0], POLLIN, 0};
    int rc = poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) {
      timed_out = rc == 0;
      break;
    }
    char buf[4096];
    ssize_t n = read(pipefd[0], buf, sizeof buf);
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  close(pipefd[0]);
  if (timed_out) kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  unlink(smt_name.c_str());
  out.millis = elapsed();

  if (timed_out) {
    out.verdict = Verdict::Timeout;
    out.detail = "no answer within " + std::to_string(solver.timeout_ms) + " ms";
    return out;
  }
  std::istringstream lines(output);
  std::string first;
  lines >> first;
  if (first == "sat") {
    out.verdict = Verdict::Verified;
  } else if (first == "unsat" || first == "unknown") {
    out.verdict = Verdict::RefutedOrUnknown;
    out.detail = first;
  } else {
    out.verdict = Verdict::SolverUnavailable;
    out.detail = output.empty() ? "solver exited with status " + std::to_string(WEXITSTATUS(status)) : output;
  }
  return out;
}

// ---------------------------------------------------------------------------
// letassert
// ---------------------------------------------------------------------------

namespace {

std::string pred_node(const Program& p, NodeId n, const std::string& binder, const std::string& v) {
  const Node& node = p.node(n);
  switch (node.kind) {
    case NodeKind::Variable:
      if (node.name != binder) throw ChcError("predicate refers to " + node.name);
      return v;
    case NodeKind::IntLit: return smt_int(node.int_value);
    case NodeKind::BoolLit: return node.bool_value ? "true" : "false";
    case NodeKind::BinaryOp:
      return "(" + smt_op(node.op) + " " + pred_node(p, node.children[0], binder, v) + " " +
             pred_node(p, node.children[1], binder, v) + ")";
    case NodeKind::Conditional:
      return "(ite " + pred_node(p, node.children[0], binder, v) + " " + pred_node(p, node.children[1], binder, v) +
             " " + pred_node(p, node.children[2], binder, v) + ")";
    default: throw ChcError("predicate uses unsupported construct " + std::string(to_string(node.kind)));
  }
}

}  // namespace

std::string predicate_to_smt(const Program& program, NodeId letassert, const std::string& var) {
  const Node& node = program.node(letassert);
  if (node.kind != NodeKind::LetAssert) throw ChcError("not a letassert node");
  return pred_node(program, node.children[1], node.name, var);
}

SolveResult verify_letassert(const AbsRes& r, const Program& program, NodeId letassert, const VerifyConfig& config) {
  std::string predicate = predicate_to_smt(program, letassert, "q");
  AbsRes simplified = simplify(r);
  std::string fallback_reason;
  if (config.solver) {
    try {
      ChcSystem system = to_chc(simplified);
      return solve(system, Query{system.root, "(not " + predicate + ")"}, *config.solver);
    } catch (const ChcError& e) {
      fallback_reason = std::string(e.what()) + "; ";
    }
  }
  SolveResult out;
  auto start = std::chrono::steady_clock::now();
  ConcSet cs = abs_eval(simplified, config.eval_depth);
  out.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (cs.widened) {
    out.verdict = Verdict::RefutedOrUnknown;
    out.detail = fallback_reason + "bounded evaluation widened";
    return out;
  }
  for (const auto& v : cs.values) {
    bool ok = false;
    try {
      ok = eval_predicate(program, letassert, to_value(v));
    } catch (const EvalError&) {
    }
    if (!ok) {
      out.verdict = Verdict::RefutedOrUnknown;
      out.detail = fallback_reason + "value " + render(v) + " violates the predicate";
      return out;
    }
  }
  out.verdict = Verdict::Verified;
  out.detail = fallback_reason + "bounded evaluation";
  return out;
}

}  // namespace pdemand
