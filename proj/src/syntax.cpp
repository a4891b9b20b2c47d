#include "pdemand/syntax.hpp"

#include <cctype>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace pdemand {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Application: return "app";
    case NodeKind::Function: return "fun";
    case NodeKind::Variable: return "var";
    case NodeKind::IntLit: return "int";
    case NodeKind::BoolLit: return "bool";
    case NodeKind::BinaryOp: return "op";
    case NodeKind::Conditional: return "if";
    case NodeKind::Record: return "record";
    case NodeKind::Projection: return "proj";
    case NodeKind::Inspection: return "inspect";
    case NodeKind::LetAssert: return "letassert";
  }
  return "?";
}

std::string_view to_string(BinOp op) {
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

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

// ------------------------------------------------------------------
// Lexer
// ------------------------------------------------------------------

enum class Tok {
  Int,
  Ident,
  KwFun,
  KwLet,
  KwLetAssert,
  KwIn,
  KwIf,
  KwThen,
  KwElse,
  KwTrue,
  KwFalse,
  KwAnd,
  KwOr,
  KwXor,
  Arrow,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Semi,
  Dot,
  Eq,
  Plus,
  Minus,
  Lt,
  Le,
  Ge,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

const std::unordered_map<std::string_view, Tok>& keywords() {
  static const std::unordered_map<std::string_view, Tok> table = {
      {"fun", Tok::KwFun},   {"let", Tok::KwLet},     {"letassert", Tok::KwLetAssert},
      {"in", Tok::KwIn},     {"if", Tok::KwIf},       {"then", Tok::KwThen},
      {"else", Tok::KwElse}, {"true", Tok::KwTrue},   {"false", Tok::KwFalse},
      {"and", Tok::KwAnd},   {"or", Tok::KwOr},       {"xor", Tok::KwXor},
  };
  return table;
}

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = column;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      tok.kind = Tok::Int;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '\'')) {
        ++j;
      }
      tok.text = std::string(text.substr(i, j - i));
      auto kw = keywords().find(tok.text);
      tok.kind = kw == keywords().end() ? Tok::Ident : kw->second;
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    auto two = text.substr(i, 2);
    if (two == "->") {
      tok.kind = Tok::Arrow;
    } else if (two == "<=") {
      tok.kind = Tok::Le;
    } else if (two == ">=") {
      tok.kind = Tok::Ge;
    }
    if (tok.kind != Tok::End) {
      tok.text = std::string(two);
      advance(2);
      out.push_back(std::move(tok));
      continue;
    }
    switch (c) {
      case '(': tok.kind = Tok::LParen; break;
      case ')': tok.kind = Tok::RParen; break;
      case '{': tok.kind = Tok::LBrace; break;
      case '}': tok.kind = Tok::RBrace; break;
      case ';': tok.kind = Tok::Semi; break;
      case '.': tok.kind = Tok::Dot; break;
      case '=': tok.kind = Tok::Eq; break;
      case '+': tok.kind = Tok::Plus; break;
      case '-': tok.kind = Tok::Minus; break;
      case '<': tok.kind = Tok::Lt; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, column);
    }
    tok.text = std::string(1, c);
    advance(1);
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.column = column;
  out.push_back(end);
  return out;
}

// ------------------------------------------------------------------
// Parser: builds a raw tree, `let` already desugared
// ------------------------------------------------------------------

struct Raw {
  NodeKind kind = NodeKind::IntLit;
  std::vector<std::unique_ptr<Raw>> children;
  std::string name;
  std::vector<std::string> fields;
  BinOp op = BinOp::Add;
  BigInt int_value;
  bool bool_value = false;
  int line = 0;
  int column = 0;
};

using RawPtr = std::unique_ptr<Raw>;

RawPtr make_raw(NodeKind kind, const Token& at) {
  auto r = std::make_unique<Raw>();
  r->kind = kind;
  r->line = at.line;
  r->column = at.column;
  return r;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  RawPtr parse_program() {
    auto e = parse_expr();
    if (peek().kind != Tok::End) fail("unexpected token '" + peek().text + "'");
    return e;
  }

 private:
  // Inside the right-hand side of `let`/`letassert` an `x in` ends the
  // binding instead of starting a record inspection; brackets reset this.
  class HeaderScope {
   public:
    HeaderScope(Parser& p, bool value) : p_(p), saved_(p.let_header_) { p_.let_header_ = value; }
    ~HeaderScope() { p_.let_header_ = saved_; }
    HeaderScope(const HeaderScope&) = delete;
    HeaderScope& operator=(const HeaderScope&) = delete;

   private:
    Parser& p_;
    bool saved_;
  };

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  Token next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, peek().line, peek().column);
  }

  Token expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      fail(std::string("expected ") + what + ", found '" + (peek().kind == Tok::End ? "end of input" : peek().text) +
           "'");
    }
    return next();
  }

  RawPtr parse_expr() {
    switch (peek().kind) {
      case Tok::KwFun: {
        Token at = next();
        Token name = expect(Tok::Ident, "parameter name");
        expect(Tok::Arrow, "'->'");
        auto fn = make_raw(NodeKind::Function, at);
        fn->name = name.text;
        fn->children.push_back(parse_expr());
        return fn;
      }
      case Tok::KwLet: {
        Token at = next();
        Token name = expect(Tok::Ident, "variable name");
        expect(Tok::Eq, "'='");
        RawPtr bound;
        {
          HeaderScope scope(*this, true);
          bound = parse_expr();
        }
        expect(Tok::KwIn, "'in'");
        auto body = parse_expr();
        auto fn = make_raw(NodeKind::Function, at);
        fn->name = name.text;
        fn->children.push_back(std::move(body));
        auto app = make_raw(NodeKind::Application, at);
        app->children.push_back(std::move(fn));
        app->children.push_back(std::move(bound));
        return app;
      }
      case Tok::KwLetAssert: {
        Token at = next();
        Token name = expect(Tok::Ident, "variable name");
        expect(Tok::Eq, "'='");
        RawPtr bound;
        {
          HeaderScope scope(*this, true);
          bound = parse_expr();
        }
        expect(Tok::KwIn, "'in'");
        auto la = make_raw(NodeKind::LetAssert, at);
        la->name = name.text;
        la->children.push_back(std::move(bound));
        la->children.push_back(parse_expr());
        return la;
      }
      case Tok::KwIf: {
        Token at = next();
        auto cond = make_raw(NodeKind::Conditional, at);
        {
          HeaderScope scope(*this, false);
          cond->children.push_back(parse_expr());
          expect(Tok::KwThen, "'then'");
          cond->children.push_back(parse_expr());
        }
        expect(Tok::KwElse, "'else'");
        cond->children.push_back(parse_expr());
        return cond;
      }
      default:
        return parse_or();
    }
  }

  RawPtr binary(BinOp op, RawPtr lhs, RawPtr rhs, const Token& at) {
    auto r = make_raw(NodeKind::BinaryOp, at);
    r->op = op;
    r->children.push_back(std::move(lhs));
    r->children.push_back(std::move(rhs));
    return r;
  }

  RawPtr parse_or() {
    auto lhs = parse_and();
    while (peek().kind == Tok::KwOr || peek().kind == Tok::KwXor) {
      Token at = next();
      auto rhs = parse_and();
      lhs = binary(at.kind == Tok::KwOr ? BinOp::Or : BinOp::Xor, std::move(lhs), std::move(rhs), at);
    }
    return lhs;
  }

  RawPtr parse_and() {
    auto lhs = parse_cmp();
    while (peek().kind == Tok::KwAnd) {
      Token at = next();
      auto rhs = parse_cmp();
      lhs = binary(BinOp::And, std::move(lhs), std::move(rhs), at);
    }
    return lhs;
  }

  RawPtr parse_cmp() {
    auto lhs = parse_add();
    std::optional<BinOp> op;
    switch (peek().kind) {
      case Tok::Eq: op = BinOp::Eq; break;
      case Tok::Lt: op = BinOp::Lt; break;
      case Tok::Le: op = BinOp::Le; break;
      case Tok::Ge: op = BinOp::Ge; break;
      default: break;
    }
    if (!op) return lhs;
    Token at = next();
    auto rhs = parse_add();
    return binary(*op, std::move(lhs), std::move(rhs), at);
  }

  RawPtr parse_add() {
    RawPtr lhs;
    if (peek().kind == Tok::Minus && peek(1).kind == Tok::Int) {
      Token at = next();
      Token digits = next();
      lhs = make_raw(NodeKind::IntLit, at);
      lhs->int_value = -BigInt(digits.text);
    } else {
      lhs = parse_app();
    }
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      Token at = next();
      auto rhs = parse_app();
      lhs = binary(at.kind == Tok::Plus ? BinOp::Add : BinOp::Sub, std::move(lhs), std::move(rhs), at);
    }
    return lhs;
  }

  bool starts_atom() const {
    switch (peek().kind) {
      case Tok::Int:
      case Tok::Ident:
      case Tok::KwTrue:
      case Tok::KwFalse:
      case Tok::LParen:
      case Tok::LBrace:
      case Tok::KwFun:
      case Tok::KwIf:
      case Tok::KwLet:
      case Tok::KwLetAssert:
        return true;
      default:
        return false;
    }
  }

  static bool open_ended(const Raw& r) {
    return r.kind == NodeKind::Function || r.kind == NodeKind::Conditional || r.kind == NodeKind::LetAssert;
  }

  RawPtr parse_app() {
    if (!starts_atom()) fail("expected an expression, found '" + (peek().kind == Tok::End ? std::string("end of input") : peek().text) + "'");
    Token first = peek();
    bool keyword_start = first.kind == Tok::KwFun || first.kind == Tok::KwIf || first.kind == Tok::KwLet ||
                         first.kind == Tok::KwLetAssert;
    auto fn = parse_postfix();
    if (keyword_start) return fn;
    while (starts_atom()) {
      Token at = peek();
      bool trailing = at.kind == Tok::KwFun || at.kind == Tok::KwIf || at.kind == Tok::KwLet ||
                      at.kind == Tok::KwLetAssert;
      auto arg = parse_postfix();
      auto app = make_raw(NodeKind::Application, at);
      app->line = first.line;
      app->column = first.column;
      app->children.push_back(std::move(fn));
      app->children.push_back(std::move(arg));
      fn = std::move(app);
      if (trailing) break;
    }
    return fn;
  }

  RawPtr parse_postfix() {
    auto e = parse_atom();
    while (peek().kind == Tok::Dot) {
      Token at = next();
      Token field = expect(Tok::Ident, "field name");
      auto proj = make_raw(NodeKind::Projection, at);
      proj->name = field.text;
      proj->children.push_back(std::move(e));
      e = std::move(proj);
    }
    return e;
  }

  RawPtr parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: {
        Token tok = next();
        auto r = make_raw(NodeKind::IntLit, tok);
        r->int_value = BigInt(tok.text);
        return r;
      }
      case Tok::KwTrue:
      case Tok::KwFalse: {
        Token tok = next();
        auto r = make_raw(NodeKind::BoolLit, tok);
        r->bool_value = tok.kind == Tok::KwTrue;
        return r;
      }
      case Tok::Ident: {
        Token tok = next();
        if (peek().kind == Tok::KwIn && !let_header_) {
          next();
          auto r = make_raw(NodeKind::Inspection, tok);
          r->name = tok.text;
          r->children.push_back(parse_postfix());
          return r;
        }
        auto r = make_raw(NodeKind::Variable, tok);
        r->name = tok.text;
        return r;
      }
      case Tok::LParen: {
        next();
        HeaderScope scope(*this, false);
        auto e = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::LBrace: {
        Token at = next();
        HeaderScope scope(*this, false);
        auto r = make_raw(NodeKind::Record, at);
        if (peek().kind != Tok::RBrace) {
          while (true) {
            Token field = expect(Tok::Ident, "field name");
            expect(Tok::Eq, "'='");
            r->fields.push_back(field.text);
            r->children.push_back(parse_expr());
            if (peek().kind == Tok::Semi) {
              next();
              if (peek().kind == Tok::RBrace) break;
              continue;
            }
            break;
          }
        }
        expect(Tok::RBrace, "'}'");
        return r;
      }
      case Tok::KwFun:
      case Tok::KwIf:
      case Tok::KwLet:
      case Tok::KwLetAssert:
        return parse_expr();
      default:
        fail("expected an expression, found '" + (t.kind == Tok::End ? std::string("end of input") : t.text) + "'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  bool let_header_ = false;
};

}  // namespace

// ------------------------------------------------------------------
// Lowering: labels, indices, validation
// ------------------------------------------------------------------

namespace {

struct Lowering {
  Program* program;
  std::vector<Node>* nodes;
  std::vector<NodeId>* labels;
  std::vector<std::pair<int, int>> positions;

  NodeId lower(const Raw& raw, std::optional<NodeId> parent) {
    NodeId id{static_cast<std::uint32_t>(nodes->size())};
    nodes->emplace_back();
    positions.emplace_back(raw.line, raw.column);
    {
      Node& n = nodes->back();
      n.kind = raw.kind;
      n.name = raw.name;
      n.fields = raw.fields;
      n.op = raw.op;
      n.int_value = raw.int_value;
      n.bool_value = raw.bool_value;
      n.parent = parent;
      if (raw.kind == NodeKind::Application || raw.kind == NodeKind::Function || raw.kind == NodeKind::Variable) {
        n.label = Label{static_cast<std::uint32_t>(labels->size())};
        labels->push_back(id);
      }
    }
    std::vector<NodeId> kids;
    kids.reserve(raw.children.size());
    for (const auto& c : raw.children) kids.push_back(lower(*c, id));
    (*nodes)[id.index].children = std::move(kids);
    return id;
  }
};

}  // namespace

Program parse_program(std::string_view text) {
  Parser parser(lex(text));
  RawPtr raw = parser.parse_program();

  Program p;
  Lowering lowering{&p, &p.nodes_, &p.label_index_, {}};
  p.root_ = lowering.lower(*raw, std::nullopt);
  const auto& pos = lowering.positions;
  auto fail_at = [&](NodeId id, const std::string& message) -> void {
    throw ParseError(message, pos[id.index].first, pos[id.index].second);
  };

  const std::size_t n = p.nodes_.size();
  p.myfun_index_.assign(n, std::nullopt);
  p.binder_index_.assign(n, std::nullopt);
  p.depth_index_.assign(n, std::nullopt);

  std::unordered_set<std::string> binders;
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = p.nodes_[i];
    if (node.kind == NodeKind::Function || node.kind == NodeKind::LetAssert) {
      if (!binders.insert(node.name).second) fail_at(NodeId{static_cast<std::uint32_t>(i)}, "duplicate binder '" + node.name + "'");
    }
    if (node.kind == NodeKind::Record) {
      std::set<std::string> seen;
      for (const auto& f : node.fields) {
        if (!seen.insert(f).second) fail_at(NodeId{static_cast<std::uint32_t>(i)}, "duplicate record field '" + f + "'");
      }
    }
    switch (node.kind) {
      case NodeKind::Function:
      case NodeKind::Variable:
      case NodeKind::Application:
      case NodeKind::IntLit:
      case NodeKind::BoolLit:
        break;
      default:
        p.core_ = false;
    }
  }

  // Scope walk. The predicate of a letassert sees only its own binder.
  struct Scope {
    std::string name;
    NodeId binder;
  };
  std::vector<Scope> scope;
  std::optional<NodeId> enclosing_fun;
  std::function<void(NodeId)> walk = [&](NodeId id) {
    p.myfun_index_[id.index] = enclosing_fun;
    const Node& node = p.nodes_[id.index];
    switch (node.kind) {
      case NodeKind::Variable: {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
          if (it->name == node.name) {
            p.binder_index_[id.index] = it->binder;
            break;
          }
        }
        if (!p.binder_index_[id.index]) fail_at(id, "unbound variable '" + node.name + "'");
        NodeId binder = *p.binder_index_[id.index];
        if (p.nodes_[binder.index].kind == NodeKind::Function) {
          std::size_t depth = 0;
          for (auto f = enclosing_fun; f && *f != binder; f = p.myfun_index_[f->index]) ++depth;
          p.depth_index_[id.index] = depth;
        }
        return;
      }
      case NodeKind::Function: {
        auto saved = enclosing_fun;
        scope.push_back({node.name, id});
        enclosing_fun = id;
        walk(node.children[0]);
        enclosing_fun = saved;
        scope.pop_back();
        return;
      }
      case NodeKind::LetAssert: {
        walk(node.children[0]);
        std::vector<Scope> saved;
        saved.swap(scope);
        scope.push_back({node.name, id});
        walk(node.children[1]);
        scope.swap(saved);
        return;
      }
      default:
        for (NodeId c : node.children) walk(c);
    }
  };
  walk(p.root_);
  return p;
}

NodeId Program::node_of(Label label) const {
  if (!has_label(label)) throw ProgramQueryError("unknown label " + std::to_string(label.id));
  return label_index_[label.id];
}

NodeId Program::binder_of(NodeId var) const {
  const auto& b = binder_index_.at(var.index);
  if (!b) throw ProgramQueryError("node " + std::to_string(var.index) + " is not a variable occurrence");
  return *b;
}

std::optional<std::size_t> Program::depth_of(NodeId var) const { return depth_index_.at(var.index); }

std::string Program::node_tag(NodeId id) const {
  const Node& n = node(id);
  if (n.label) return std::to_string(n.label->id);
  return "n" + std::to_string(id.index);
}

std::optional<Label> my_fun(const Program& program, Label label) {
  NodeId id = program.node_of(label);
  auto f = program.my_fun(id);
  if (!f) return std::nullopt;
  return program.node(*f).label;
}

std::size_t lexical_depth(const Program& program, Label label) {
  NodeId id = program.node_of(label);
  if (program.node(id).kind != NodeKind::Variable) {
    throw ProgramQueryError("label " + std::to_string(label.id) + " is not a variable occurrence");
  }
  auto d = program.depth_of(id);
  if (!d) throw ProgramQueryError("variable at label " + std::to_string(label.id) + " is not function-bound");
  return *d;
}

namespace {

void print(const Program& p, NodeId id, std::ostream& out) {
  const Node& n = p.node(id);
  switch (n.kind) {
    case NodeKind::Application:
      out << '(';
      print(p, n.children[0], out);
      out << ' ';
      print(p, n.children[1], out);
      out << ')';
      return;
    case NodeKind::Function:
      out << "(fun " << n.name << " -> ";
      print(p, n.children[0], out);
      out << ')';
      return;
    case NodeKind::Variable:
      out << n.name;
      return;
    case NodeKind::IntLit:
      if (n.int_value < 0) {
        out << "(-" << BigInt(-n.int_value).str() << ')';
      } else {
        out << n.int_value.str();
      }
      return;
    case NodeKind::BoolLit:
      out << (n.bool_value ? "true" : "false");
      return;
    case NodeKind::BinaryOp:
      out << '(';
      print(p, n.children[0], out);
      out << ' ' << to_string(n.op) << ' ';
      print(p, n.children[1], out);
      out << ')';
      return;
    case NodeKind::Conditional:
      out << "(if ";
      print(p, n.children[0], out);
      out << " then ";
      print(p, n.children[1], out);
      out << " else ";
      print(p, n.children[2], out);
      out << ')';
      return;
    case NodeKind::Record:
      out << '{';
      for (std::size_t i = 0; i < n.fields.size(); ++i) {
        if (i) out << "; ";
        out << n.fields[i] << " = ";
        print(p, n.children[i], out);
      }
      out << '}';
      return;
    case NodeKind::Projection:
      out << '(';
      print(p, n.children[0], out);
      out << ")." << n.name;
      return;
    case NodeKind::Inspection:
      out << '(' << n.name << " in (";
      print(p, n.children[0], out);
      out << "))";
      return;
    case NodeKind::LetAssert:
      out << "(letassert " << n.name << " = (";
      print(p, n.children[0], out);
      out << ") in ";
      print(p, n.children[1], out);
      out << ')';
      return;
  }
}

}  // namespace

std::string pretty_print(const Program& program, NodeId id) {
  std::ostringstream out;
  print(program, id, out);
  return out.str();
}

std::string pretty_print(const Program& program) { return pretty_print(program, program.root()); }

std::string dump_ast(const Program& program) {
  std::ostringstream out;
  for (std::size_t i = 0; i < program.node_count(); ++i) {
    NodeId id{static_cast<std::uint32_t>(i)};
    const Node& n = program.node(id);
    out << program.node_tag(id) << '\t' << to_string(n.kind);
    switch (n.kind) {
      case NodeKind::Function:
      case NodeKind::Variable:
      case NodeKind::Projection:
      case NodeKind::Inspection:
      case NodeKind::LetAssert:
        out << ' ' << n.name;
        break;
      case NodeKind::IntLit:
        out << ' ' << n.int_value.str();
        break;
      case NodeKind::BoolLit:
        out << ' ' << (n.bool_value ? "true" : "false");
        break;
      case NodeKind::BinaryOp:
        out << ' ' << to_string(n.op);
        break;
      case NodeKind::Record:
        for (const auto& f : n.fields) out << ' ' << f;
        break;
      default:
        break;
    }
    out << '\t';
    for (std::size_t c = 0; c < n.children.size(); ++c) {
      if (c) out << ',';
      out << program.node_tag(n.children[c]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pdemand
