#include <algorithm>
#include <cctype>
#include <set>

#include "asyncsynth/frontend.hpp"

namespace asyncsynth {
namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.loc = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      static const char* two[] = {":=", "==", "!="};
      t.kind = Tok::Punct;
      for (const char* p : two) {
        if (src.substr(i, 2) == p) t.text = p;
      }
      if (t.text.empty()) {
        if (std::string_view("{}();,*?+-<").find(c) == std::string_view::npos)
          throw Error(ErrorCode::SyntaxError, std::string("unexpected character '") + c + "'", t.loc, "token");
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.loc = {line, col};
  out.push_back(end);
  return out;
}

const std::set<std::string> kKeywords = {"globals", "asyncify", "method", "async", "call", "return", "await",
                                         "if",      "else",     "while",  "assert", "let", "self"};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {
    // Globals may be declared anywhere at top level; collect them first so
    // statements can be classified in one pass.
    for (std::size_t i = 0; i + 1 < toks_.size(); ++i) {
      if (toks_[i].kind == Tok::Ident && toks_[i].text == "globals") {
        for (std::size_t j = i + 1; j < toks_.size() && toks_[j].kind == Tok::Ident; j += 2) {
          globals_.insert(toks_[j].text);
          if (toks_[j + 1].text != ",") break;
        }
      }
    }
  }

  ProgramAst run() {
    ProgramAst p;
    std::set<std::string> seen_globals;
    while (peek().kind != Tok::End) {
      if (is_kw("globals")) {
        next();
        for (;;) {
          Token id = ident("global name");
          if (seen_globals.insert(id.text).second) p.globals.push_back(id.text);
          if (!accept(",")) break;
        }
        expect(";");
      } else if (is_kw("asyncify")) {
        next();
        for (;;) {
          Token id = ident("method name");
          asyncify_locs_.push_back({id.text, id.loc});
          if (std::find(p.asyncify.begin(), p.asyncify.end(), id.text) == p.asyncify.end())
            p.asyncify.push_back(id.text);
          if (!accept(",")) break;
        }
        expect(";");
      } else if (is_kw("async") || is_kw("method")) {
        MethodDef m;
        m.loc = peek().loc;
        if (accept_kw("async")) m.declared_async = true;
        expect_kw("method");
        Token name = ident("method name");
        m.name = name.text;
        if (p.find_method(m.name))
          throw Error(ErrorCode::DuplicateMethod, "method '" + m.name + "' defined twice", name.loc);
        m.body = block();
        p.methods.push_back(std::move(m));
      } else {
        fail("'globals', 'asyncify' or 'method'");
      }
    }
    validate(p);
    finalize(p);
    return p;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<std::string> globals_;
  std::vector<std::pair<std::string, SourceLoc>> asyncify_locs_;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool is_kw(std::string_view kw) const { return peek().kind == Tok::Ident && peek().text == kw; }
  bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw Error(ErrorCode::SyntaxError, "expected " + expected + ", found " + found, t.loc, expected);
  }

  bool accept(std::string_view p) {
    if (is_punct(p)) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_kw(std::string_view kw) {
    if (is_kw(kw)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail("'" + std::string(p) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("'" + std::string(kw) + "'");
  }
  Token ident(const std::string& what) {
    if (peek().kind != Tok::Ident || kKeywords.count(peek().text)) fail(what);
    return next();
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> body;
    while (!is_punct("}")) {
      if (peek().kind == Tok::End) fail("'}'");
      body.push_back(statement());
    }
    expect("}");
    return body;
  }

  Stmt statement() {
    Stmt s;
    s.loc = peek().loc;
    if (accept_kw("return")) {
      s.kind = StmtKind::Return;
      expect(";");
    } else if (accept_kw("await")) {
      if (accept("*")) {
        s.kind = StmtKind::AwaitStar;
      } else {
        Token r = ident("task variable or '*'");
        check_local(r, "await");
        s.kind = StmtKind::AwaitVar;
        s.local = r.text;
      }
      expect(";");
    } else if (accept_kw("if")) {
      s.kind = StmtKind::If;
      expect("(");
      s.expr = expr();
      expect(")");
      s.body = block();
      if (accept_kw("else")) {
        s.has_else = true;
        s.else_body = block();
      }
    } else if (accept_kw("while")) {
      s.kind = StmtKind::While;
      expect("(");
      s.expr = expr();
      expect(")");
      s.body = block();
    } else if (accept_kw("assert")) {
      s.kind = StmtKind::Assert;
      expect("(");
      s.expr = expr();
      expect(")");
      expect(";");
    } else if (accept_kw("let")) {
      Token r = ident("local variable");
      check_local(r, "let");
      s.kind = StmtKind::Assign;
      s.local = r.text;
      expect(":=");
      s.expr = expr();
      expect(";");
    } else {
      Token lhs = ident("statement");
      expect(":=");
      assignment(s, lhs);
      expect(";");
    }
    return s;
  }

  void check_local(const Token& t, std::string_view ctx) const {
    if (globals_.count(t.text))
      throw Error(ErrorCode::SyntaxError, std::string(ctx) + " needs a local variable, '" + t.text + "' is global",
                  t.loc, "local variable");
  }

  void assignment(Stmt& s, const Token& lhs) {
    bool lhs_global = globals_.count(lhs.text) > 0;
    if (accept_kw("call")) {
      Token m = ident("method name");
      check_local(lhs, "a call result");
      s.kind = StmtKind::Call;
      s.local = lhs.text;
      s.callee = m.text;
      return;
    }
    // A bare global on the right is a read.
    if (peek().kind == Tok::Ident && globals_.count(peek().text) && peek(1).kind == Tok::Punct &&
        peek(1).text == ";") {
      Token g = next();
      if (lhs_global)
        throw Error(ErrorCode::SyntaxError, "a read must assign to a local, '" + lhs.text + "' is global", lhs.loc,
                    "local variable");
      s.kind = StmtKind::Read;
      s.local = lhs.text;
      s.global = g.text;
      return;
    }
    if (!lhs_global)
      throw Error(ErrorCode::UndeclaredGlobal,
                  "'" + lhs.text + "' is written with an expression but is not declared in globals", lhs.loc);
    s.kind = StmtKind::Write;
    s.global = lhs.text;
    s.expr = expr();
  }

  ExprPtr expr() {
    ExprPtr l = sum();
    if (is_punct("==") || is_punct("!=") || is_punct("<")) {
      std::string op = next().text;
      ExprPtr r = sum();
      BinOp b = op == "==" ? BinOp::Eq : op == "!=" ? BinOp::Ne : BinOp::Lt;
      return Expr::binary(b, l, r);
    }
    return l;
  }

  ExprPtr sum() {
    ExprPtr l = unary();
    while (is_punct("+") || is_punct("-")) {
      BinOp b = next().text == "+" ? BinOp::Add : BinOp::Sub;
      l = Expr::binary(b, l, unary());
    }
    return l;
  }

  ExprPtr unary() {
    if (accept("-")) {
      ExprPtr e = unary();
      if (e->kind == ExprKind::Int) return Expr::integer(-e->value);
      return Expr::binary(BinOp::Sub, Expr::integer(0), e);
    }
    return atom();
  }

  ExprPtr atom() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      next();
      return Expr::integer(std::stoll(t.text));
    }
    if (accept("*")) return Expr::star();
    if (accept("?")) return Expr::choice();
    if (accept("(")) {
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    if (accept_kw("self")) return Expr::self();
    if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
      if (globals_.count(t.text))
        throw Error(ErrorCode::SyntaxError,
                    "global '" + t.text + "' used in an expression; read it into a local first", t.loc,
                    "local variable");
      next();
      return Expr::local(t.text);
    }
    fail("expression");
  }

  void validate(ProgramAst& p) {
    if (!p.find_method("Main")) throw Error(ErrorCode::MissingMain, "no method named Main", {1, 1});
    std::map<std::string, std::set<std::string>> graph;
    for (const auto& m : p.methods) {
      graph[m.name];
      for_each_stmt(m.body, [&](const Stmt& s) {
        if (s.kind != StmtKind::Call) return;
        if (!p.find_method(s.callee))
          throw Error(ErrorCode::UnknownMethod, "call to undefined method '" + s.callee + "'", s.loc);
        graph[m.name].insert(s.callee);
      });
    }
    for (const auto& [name, loc] : asyncify_locs_) {
      const MethodDef* m = p.find_method(name);
      if (!m) throw Error(ErrorCode::UnknownMethod, "asyncify names undefined method '" + name + "'", loc);
      bool base = true;
      for_each_stmt(m->body, [&](const Stmt& s) { base = base && s.kind != StmtKind::Call; });
      if (!base) throw Error(ErrorCode::AsyncifyNotBase, "asyncify target '" + name + "' contains calls", loc);
    }
    // Cycle detection by DFS colouring.
    std::map<std::string, int> colour;
    std::function<void(const std::string&)> visit = [&](const std::string& n) {
      colour[n] = 1;
      for (const auto& c : graph[n]) {
        if (colour[c] == 1) {
          SourceLoc loc = p.find_method(n)->loc;
          for_each_stmt(p.find_method(n)->body, [&](const Stmt& s) {
            if (s.kind == StmtKind::Call && s.callee == c) loc = s.loc;
          });
          throw Error(ErrorCode::RecursionDetected, "recursive call from '" + n + "' to '" + c + "'", loc);
        }
        if (colour[c] == 0) visit(c);
      }
      colour[n] = 2;
    };
    for (const auto& m : p.methods)
      if (colour[m.name] == 0) visit(m.name);
  }
};

}  // namespace

ProgramAst parse_program(std::string_view text) {
  Parser parser(lex(text));
  return parser.run();
}

std::string format_diagnostic(std::string_view file, SourceLoc loc, std::string_view code,
                              std::string_view message) {
  return std::string(file) + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " +
         std::string(code) + ": " + std::string(message);
}

}  // namespace asyncsynth
