#include "asyncsynth/ast.hpp"

#include <charconv>
#include <sstream>

namespace asyncsynth {

std::string StmtId::str() const {
  std::string out = method + ":";
  if (exit) return out + "exit";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(path[i]);
  }
  if (slot >= 0) out += "~" + std::to_string(slot);
  return out;
}

StmtId StmtId::exit_of(std::string method) {
  StmtId id;
  id.method = std::move(method);
  id.exit = true;
  return id;
}

static int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::SyntaxError, "malformed statement id component '" + std::string(s) + "'");
  return v;
}

StmtId StmtId::parse(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::SyntaxError, "malformed statement id '" + std::string(text) + "'");
  StmtId id;
  id.method = std::string(text.substr(0, colon));
  std::string_view rest = text.substr(colon + 1);
  if (rest == "exit") {
    id.exit = true;
    return id;
  }
  if (auto tilde = rest.find('~'); tilde != std::string_view::npos) {
    id.slot = parse_int(rest.substr(tilde + 1));
    rest = rest.substr(0, tilde);
  }
  while (!rest.empty()) {
    auto dot = rest.find('.');
    id.path.push_back(parse_int(rest.substr(0, dot)));
    if (dot == std::string_view::npos) break;
    rest = rest.substr(dot + 1);
  }
  return id;
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "syntax-error";
    case ErrorCode::UndeclaredGlobal: return "undeclared-global";
    case ErrorCode::DuplicateMethod: return "duplicate-method";
    case ErrorCode::RecursionDetected: return "recursion";
    case ErrorCode::UnmatchedAwait: return "unmatched-await";
    case ErrorCode::UnknownMethod: return "unknown-method";
    case ErrorCode::MissingMain: return "missing-main";
    case ErrorCode::AsyncifyNotBase: return "asyncify-not-base";
    case ErrorCode::StateBudgetExceeded: return "state-budget";
    case ErrorCode::SpaceBudgetExceeded: return "space-budget";
    case ErrorCode::DifferentBase: return "different-base";
    case ErrorCode::InvalidRootCause: return "invalid-root-cause";
    case ErrorCode::StuckState: return "stuck-state";
    case ErrorCode::Unrepresentable: return "unrepresentable";
  }
  return "error";
}

ExprPtr Expr::integer(std::int64_t v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Int;
  e->value = v;
  return e;
}

ExprPtr Expr::local(std::string n) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Local;
  e->name = std::move(n);
  return e;
}

ExprPtr Expr::star() {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Star;
  return e;
}

ExprPtr Expr::choice() {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Choice;
  return e;
}

ExprPtr Expr::self() {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Self;
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Binary;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Int: return a.value == b.value;
    case ExprKind::Local: return a.name == b.name;
    case ExprKind::Star:
    case ExprKind::Choice:
    case ExprKind::Self: return true;
    case ExprKind::Binary:
      return a.op == b.op && expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
  }
  return false;
}

bool expr_has_star(const Expr& e) {
  if (e.kind == ExprKind::Star || e.kind == ExprKind::Choice) return true;
  if (e.kind == ExprKind::Binary) return expr_has_star(*e.lhs) || expr_has_star(*e.rhs);
  return false;
}

void expr_locals(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Local) out.insert(e.name);
  if (e.kind == ExprKind::Binary) {
    expr_locals(*e.lhs, out);
    expr_locals(*e.rhs, out);
  }
}

static int precedence(BinOp op) {
  switch (op) {
    case BinOp::Add:
    case BinOp::Sub: return 2;
    default: return 1;
  }
}

static std::string_view op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
  }
  return "?";
}

static std::string expr_str_prec(const Expr& e, int outer) {
  switch (e.kind) {
    case ExprKind::Int: return std::to_string(e.value);
    case ExprKind::Local: return e.name;
    case ExprKind::Star: return "*";
    case ExprKind::Choice: return "?";
    case ExprKind::Self: return "self";
    case ExprKind::Binary: {
      int p = precedence(e.op);
      // Left-associative: the right operand needs parentheses at equal precedence.
      std::string s = expr_str_prec(*e.lhs, p) + " " + std::string(op_text(e.op)) + " " +
                      expr_str_prec(*e.rhs, p + 1);
      return p < outer ? "(" + s + ")" : s;
    }
  }
  return "?";
}

std::string expr_str(const Expr& e) { return expr_str_prec(e, 0); }

const MethodDef* ProgramAst::find_method(std::string_view name) const {
  for (const auto& m : methods)
    if (m.name == name) return &m;
  return nullptr;
}

MethodDef* ProgramAst::find_method(std::string_view name) {
  for (auto& m : methods)
    if (m.name == name) return &m;
  return nullptr;
}

bool ProgramAst::is_global(std::string_view name) const {
  for (const auto& g : globals)
    if (g == name) return true;
  return false;
}

namespace {

void number(std::vector<Stmt>& body, const std::string& method, const std::vector<int>& prefix) {
  int index = 0;
  int slot = 0;
  for (auto& s : body) {
    s.id.method = method;
    s.id.exit = false;
    s.id.path = prefix;
    s.id.path.push_back(index);
    if (s.kind == StmtKind::AwaitVar) {
      s.id.slot = slot++;
      continue;
    }
    s.id.slot = -1;
    slot = 0;
    auto sub = s.id.path;
    sub.push_back(0);
    number(s.body, method, sub);
    if (s.kind == StmtKind::If) {
      sub.back() = 1;
      number(s.else_body, method, sub);
    }
    ++index;
  }
}

bool any_stmt(const std::vector<Stmt>& body, const std::function<bool(const Stmt&)>& pred) {
  for (const auto& s : body) {
    if (pred(s)) return true;
    if (any_stmt(s.body, pred) || any_stmt(s.else_body, pred)) return true;
  }
  return false;
}

bool stmts_equal(const std::vector<Stmt>& a, const std::vector<Stmt>& b);

bool stmt_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.id != b.id || a.local != b.local || a.global != b.global || a.callee != b.callee)
    return false;
  // An empty else written out is the same as none.
  bool ea = a.has_else && !a.else_body.empty(), eb = b.has_else && !b.else_body.empty();
  if (ea != eb || a.from_loop != b.from_loop) return false;
  if (bool(a.expr) != bool(b.expr)) return false;
  if (a.expr && !expr_equal(*a.expr, *b.expr)) return false;
  return stmts_equal(a.body, b.body) && stmts_equal(a.else_body, b.else_body);
}

bool stmts_equal(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!stmt_equal(a[i], b[i])) return false;
  return true;
}

void erase_in(std::vector<Stmt>& body) {
  std::vector<Stmt> kept;
  kept.reserve(body.size());
  for (auto& s : body) {
    if (s.kind == StmtKind::AwaitVar) continue;
    erase_in(s.body);
    erase_in(s.else_body);
    kept.push_back(std::move(s));
  }
  body = std::move(kept);
}

const Stmt* find_in(const std::vector<Stmt>& body, const StmtId& id) {
  for (const auto& s : body) {
    if (s.id == id) return &s;
    if (const Stmt* r = find_in(s.body, id)) return r;
    if (const Stmt* r = find_in(s.else_body, id)) return r;
  }
  return nullptr;
}

}  // namespace

void finalize(ProgramAst& p) {
  for (auto& m : p.methods) {
    number(m.body, m.name, {});
    m.is_base = !any_stmt(m.body, [](const Stmt& s) { return s.kind == StmtKind::Call; });
    m.is_async = m.declared_async || any_stmt(m.body, [](const Stmt& s) {
                   return s.kind == StmtKind::AwaitVar || s.kind == StmtKind::AwaitStar;
                 });
  }
}

bool structurally_equal(const ProgramAst& a, const ProgramAst& b) {
  if (a.globals != b.globals || a.asyncify != b.asyncify || a.methods.size() != b.methods.size()) return false;
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    const auto& x = a.methods[i];
    const auto& y = b.methods[i];
    if (x.name != y.name || x.is_async != y.is_async || x.is_base != y.is_base) return false;
    if (!stmts_equal(x.body, y.body)) return false;
  }
  return true;
}

void for_each_stmt(const std::vector<Stmt>& body, const std::function<void(const Stmt&)>& fn) {
  for (const auto& s : body) {
    fn(s);
    for_each_stmt(s.body, fn);
    for_each_stmt(s.else_body, fn);
  }
}

void for_each_stmt(const ProgramAst& p, const std::function<void(const MethodDef&, const Stmt&)>& fn) {
  for (const auto& m : p.methods)
    for_each_stmt(m.body, [&](const Stmt& s) { fn(m, s); });
}

const Stmt* find_stmt(const ProgramAst& p, const StmtId& id) {
  const MethodDef* m = p.find_method(id.method);
  return m ? find_in(m->body, id) : nullptr;
}

ProgramAst erase_await_vars(const ProgramAst& p) {
  ProgramAst out = p;
  for (auto& m : out.methods) erase_in(m.body);
  finalize(out);
  return out;
}

bool has_await_vars(const ProgramAst& p) {
  for (const auto& m : p.methods)
    if (any_stmt(m.body, [](const Stmt& s) { return s.kind == StmtKind::AwaitVar; })) return true;
  return false;
}

namespace {

bool insert_in(std::vector<Stmt>& body, const StmtId& target, std::vector<Stmt>& stmts, bool after) {
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i].id == target) {
      auto pos = body.begin() + static_cast<std::ptrdiff_t>(i + (after ? 1 : 0));
      body.insert(pos, std::make_move_iterator(stmts.begin()), std::make_move_iterator(stmts.end()));
      return true;
    }
    if (insert_in(body[i].body, target, stmts, after) || insert_in(body[i].else_body, target, stmts, after))
      return true;
  }
  return false;
}

}  // namespace

bool insert_before(ProgramAst& p, const StmtId& target, std::vector<Stmt> stmts) {
  MethodDef* m = p.find_method(target.method);
  return m && insert_in(m->body, target, stmts, false);
}

bool insert_after(ProgramAst& p, const StmtId& target, std::vector<Stmt> stmts) {
  MethodDef* m = p.find_method(target.method);
  return m && insert_in(m->body, target, stmts, true);
}

namespace make {

Stmt read(std::string local, std::string global) {
  Stmt s;
  s.kind = StmtKind::Read;
  s.local = std::move(local);
  s.global = std::move(global);
  return s;
}

Stmt write(std::string global, ExprPtr e) {
  Stmt s;
  s.kind = StmtKind::Write;
  s.global = std::move(global);
  s.expr = std::move(e);
  return s;
}

Stmt assign(std::string local, ExprPtr e) {
  Stmt s;
  s.kind = StmtKind::Assign;
  s.local = std::move(local);
  s.expr = std::move(e);
  return s;
}

Stmt assert_that(ExprPtr e) {
  Stmt s;
  s.kind = StmtKind::Assert;
  s.expr = std::move(e);
  return s;
}

Stmt ret() { return Stmt{}; }

Stmt if_then(ExprPtr cond, std::vector<Stmt> then_body, std::vector<Stmt> else_body) {
  Stmt s;
  s.kind = StmtKind::If;
  s.expr = std::move(cond);
  s.body = std::move(then_body);
  s.has_else = !else_body.empty();
  s.else_body = std::move(else_body);
  return s;
}

}  // namespace make

}  // namespace asyncsynth
