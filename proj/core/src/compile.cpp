#include <algorithm>
#include <map>

#include "asyncsynth/frontend.hpp"
#include "compiled.hpp"

namespace asyncsynth {

int ProgramIndex::stmt_index(const StmtId& id) const {
  auto it = std::lower_bound(stmts.begin(), stmts.end(), id);
  return it != stmts.end() && *it == id ? static_cast<int>(it - stmts.begin()) : -1;
}

int ProgramIndex::global_index(std::string_view name) const {
  for (std::size_t i = 0; i < globals.size(); ++i)
    if (globals[i] == name) return static_cast<int>(i);
  return -1;
}

namespace detail {
namespace {

class MethodCompiler {
 public:
  MethodCompiler(const ProgramIndex& idx, const std::map<std::string, int>& methods, CMethod& out)
      : idx_(idx), methods_(methods), m_(out) {}

  void body(const std::vector<Stmt>& stmts) {
    for (const auto& s : stmts) stmt(s);
  }

  void finish(const std::string& name) {
    Instr ret;
    ret.op = Op::Return;
    ret.stmt = idx_.stmt_index(StmtId::exit_of(name));
    m_.code.push_back(ret);
    m_.nlocals = static_cast<int>(slots_.size());
  }

 private:
  const ProgramIndex& idx_;
  const std::map<std::string, int>& methods_;
  CMethod& m_;
  std::map<std::string, int> slots_;

  int slot(const std::string& name) {
    auto [it, fresh] = slots_.emplace(name, static_cast<int>(slots_.size()));
    (void)fresh;
    return it->second;
  }

  int expr(const ExprPtr& e) {
    ENode n;
    n.kind = e->kind;
    n.value = e->value;
    if (e->kind == ExprKind::Local) n.slot = slot(e->name);
    if (e->kind == ExprKind::Binary) {
      n.op = e->op;
      n.l = expr(e->lhs);
      n.r = expr(e->rhs);
    }
    m_.exprs.push_back(n);
    return static_cast<int>(m_.exprs.size()) - 1;
  }

  int emit(Instr i) {
    m_.code.push_back(i);
    return static_cast<int>(m_.code.size()) - 1;
  }

  void stmt(const Stmt& s) {
    Instr i;
    i.stmt = idx_.stmt_index(s.id);
    switch (s.kind) {
      case StmtKind::Read:
        i.op = Op::Read;
        i.var = idx_.global_index(s.global);
        i.slot = slot(s.local);
        emit(i);
        break;
      case StmtKind::Write:
        i.op = Op::Write;
        i.var = idx_.global_index(s.global);
        i.expr = expr(s.expr);
        emit(i);
        break;
      case StmtKind::Assign:
        i.op = Op::Assign;
        i.slot = slot(s.local);
        i.expr = expr(s.expr);
        emit(i);
        break;
      case StmtKind::Assert:
        i.op = Op::Assert;
        i.expr = expr(s.expr);
        emit(i);
        break;
      case StmtKind::Call:
        i.op = Op::Call;
        i.slot = slot(s.local);
        i.callee = methods_.at(s.callee);
        emit(i);
        break;
      case StmtKind::Return:
        i.op = Op::Return;
        emit(i);
        break;
      case StmtKind::AwaitVar:
        i.op = Op::AwaitVar;
        i.slot = slot(s.local);
        emit(i);
        break;
      case StmtKind::AwaitStar:
        i.op = Op::AwaitStar;
        emit(i);
        break;
      case StmtKind::If: {
        i.op = Op::Branch;
        i.expr = expr(s.expr);
        int br = emit(i);
        body(s.body);
        Instr j;
        j.op = Op::Jump;
        int jump = emit(j);
        m_.code[br].target = static_cast<int>(m_.code.size());
        body(s.else_body);
        m_.code[jump].target = static_cast<int>(m_.code.size());
        break;
      }
      case StmtKind::While: {
        Instr enter;
        enter.op = Op::LoopEnter;
        enter.loop = m_.nloops++;
        emit(enter);
        i.op = Op::LoopTest;
        i.loop = enter.loop;
        i.expr = expr(s.expr);
        int test = emit(i);
        body(s.body);
        Instr back;
        back.op = Op::Jump;
        back.target = test;
        emit(back);
        m_.code[test].target = static_cast<int>(m_.code.size());
        break;
      }
    }
  }
};

}  // namespace

Compiled compile(const ProgramAst& p) {
  Compiled c;
  auto idx = std::make_shared<ProgramIndex>();
  idx->globals = p.globals;
  for_each_stmt(p, [&](const MethodDef&, const Stmt& s) { idx->stmts.push_back(s.id); });
  for (const auto& m : p.methods) idx->stmts.push_back(StmtId::exit_of(m.name));
  std::sort(idx->stmts.begin(), idx->stmts.end());
  c.index = idx;

  std::map<std::string, int> by_name;
  for (std::size_t i = 0; i < p.methods.size(); ++i) by_name[p.methods[i].name] = static_cast<int>(i);
  const auto lambda = p.lambda();
  const auto sigma = sigma_star(p);
  c.methods.resize(p.methods.size());
  for (std::size_t i = 0; i < p.methods.size(); ++i) {
    const auto& m = p.methods[i];
    auto& cm = c.methods[i];
    cm.name = m.name;
    cm.lambda = lambda.count(m.name) > 0;
    cm.sigma = sigma.count(m.name) > 0;
    MethodCompiler mc(*idx, by_name, cm);
    mc.body(m.body);
    mc.finish(m.name);
  }
  c.main = by_name.at("Main");
  return c;
}

namespace {

std::int64_t apply_op(BinOp op, std::int64_t a, std::int64_t b) {
  auto ua = static_cast<std::uint64_t>(a), ub = static_cast<std::uint64_t>(b);
  switch (op) {
    case BinOp::Add: return static_cast<std::int64_t>(ua + ub);
    case BinOp::Sub: return static_cast<std::int64_t>(ua - ub);
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Lt: return a < b;
  }
  return 0;
}

}  // namespace

void eval_all(const CMethod& m, int node, const std::vector<std::int64_t>& locals, TaskId self,
              const std::vector<std::int64_t>& domain, std::vector<std::int64_t>& out) {
  const ENode& n = m.exprs[node];
  out.clear();
  switch (n.kind) {
    case ExprKind::Int: out.push_back(n.value); return;
    case ExprKind::Local: out.push_back(locals[n.slot]); return;
    case ExprKind::Self: out.push_back(self); return;
    case ExprKind::Choice: out = {0, 1}; return;
    case ExprKind::Star:
      out = domain;
      break;
    case ExprKind::Binary: {
      std::vector<std::int64_t> l, r;
      eval_all(m, n.l, locals, self, domain, l);
      eval_all(m, n.r, locals, self, domain, r);
      for (auto a : l)
        for (auto b : r) out.push_back(apply_op(n.op, a, b));
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

std::vector<std::int64_t> initial_globals(const ProgramIndex& idx, const ExplorationConfig& cfg) {
  std::vector<std::int64_t> g(idx.globals.size(), 0);
  for (const auto& [name, v] : cfg.initial) {
    int k = idx.global_index(name);
    if (k < 0) throw Error(ErrorCode::UndeclaredGlobal, "initial value for undeclared global '" + name + "'");
    g[k] = v;
  }
  return g;
}

}  // namespace detail
}  // namespace asyncsynth
