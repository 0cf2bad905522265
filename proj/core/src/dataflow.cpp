#include "asyncsynth/dataflow.hpp"

#include <algorithm>

#include "asyncsynth/frontend.hpp"
#include "stmt_graph.hpp"

namespace asyncsynth {

namespace {

void abstract_body(std::vector<Stmt>& body) {
  for (auto& s : body) {
    if (s.kind == StmtKind::While) {
      s.kind = StmtKind::If;
      s.from_loop = true;
      s.has_else = false;
      s.else_body.clear();
    }
    if (s.kind == StmtKind::If) s.expr = Expr::star();
    abstract_body(s.body);
    abstract_body(s.else_body);
  }
}

std::vector<std::string> bottom_up(const ProgramAst& p) {
  auto order = top_down_order(p);
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

ProgramAst abstract_program(const ProgramAst& p) {
  ProgramAst q = p;
  for (auto& m : q.methods) abstract_body(m.body);
  finalize(q);
  return q;
}

void AccessSummary::merge(const AccessSummary& o) {
  reads.insert(o.reads.begin(), o.reads.end());
  writes.insert(o.writes.begin(), o.writes.end());
}

RwSummaries rw_var(const ProgramAst& p) {
  RwSummaries out;
  for (const auto& name : bottom_up(p)) {
    const MethodDef* m = p.find_method(name);
    AccessSummary& ms = out.method[name];
    for_each_stmt(m->body, [&](const Stmt& s) {
      AccessSummary a;
      if (s.kind == StmtKind::Read) a.reads.insert(s.global);
      else if (s.kind == StmtKind::Write) a.writes.insert(s.global);
      else if (s.kind == StmtKind::Call) a = out.method.at(s.callee);
      else return;
      ms.merge(a);
      out.stmt[s.id] = std::move(a);
    });
  }
  return out;
}

namespace {

AccessSummary crw_of(const MethodDef& m, const RwSummaries& rw, const std::map<std::string, AccessSummary>& done) {
  detail::StmtGraph g(m);
  std::set<StmtId> after_await;
  for (const auto& [id, s] : g.stmt)
    if (s->kind == StmtKind::AwaitVar || s->kind == StmtKind::AwaitStar) {
      auto r = g.reach(id, false, [](const StmtId&) { return false; });
      after_await.insert(r.begin(), r.end());
    }
  AccessSummary out;
  for_each_stmt(m.body, [&](const Stmt& s) {
    auto it = rw.stmt.find(s.id);
    if (it == rw.stmt.end()) return;
    if (after_await.count(s.id)) out.merge(it->second);
    else if (s.kind == StmtKind::Call) out.merge(done.at(s.callee));
  });
  return out;
}

}  // namespace

std::map<std::string, AccessSummary> crw_var(const ProgramAst& q, const RwSummaries& rw) {
  std::map<std::string, AccessSummary> out;
  for (const auto& name : bottom_up(q)) out[name] = crw_of(*q.find_method(name), rw, out);
  return out;
}

bool conflicts(const AccessSummary& a, const AccessSummary& b) {
  auto meets = [](const std::set<std::string>& x, const std::set<std::string>& y) {
    return std::any_of(x.begin(), x.end(), [&](const std::string& v) { return y.count(v) > 0; });
  };
  return meets(a.writes, b.reads) || meets(a.writes, b.writes) || meets(b.writes, a.reads);
}

MaxRelResult maxrel_sharp(const Asynchronization& a, std::size_t* summary_ops, Semantics semantics) {
  const AsyncSpace& space = a.space();
  const RwSummaries rw = rw_var(space.base());
  std::size_t ops = 0;
  MaxRelResult out{a, {}, false};
  std::map<std::string, AccessSummary> crw;
  for (const auto& name : bottom_up(space.base())) {
    std::vector<int> calls;
    for (std::size_t k = 0; k < space.calls().size(); ++k)
      if (space.calls()[k].method == name) calls.push_back(static_cast<int>(k));
    if (!calls.empty()) {
      std::vector<StmtId> body;
      for_each_stmt(space.base().find_method(name)->body, [&](const Stmt& s) {
        if (rw.stmt.count(s.id)) body.push_back(s.id);
      });
      for (const auto& s : body)
        for (int k : calls) {
          const CallSite& c = space.calls()[k];
          // s lies between the call and its await iff the await covers it.
          int e = space.element_of(k, s);
          if (e < 0 || !out.result.covered()[e]) continue;
          ++ops;
          if (!conflicts(rw.stmt.at(s), crw.at(c.callee))) continue;
          RootCause rc{c.call, s};
          Asynchronization next = repair_data_race(out.result, rc);
          out.steps.push_back({MinRace{rc, StmtId{}, s}, {k}});
          out.result = std::move(next);
        }
    }
    crw[name] = semantics == Semantics::Threads ? rw.method.at(name)
                                                : crw_of(*out.result.program().find_method(name), rw, crw);
    ++ops;
  }
  if (summary_ops) *summary_ops += ops;
  return out;
}

Asynchronization to_abstract(const Asynchronization& a) {
  auto s = std::make_shared<const AsyncSpace>(abstract_program(a.space().base()));
  if (s->size() != a.space().size()) throw Error(ErrorCode::Unrepresentable, "abstraction changed the placement lattice");
  return {s, a.covered()};
}

Asynchronization to_concrete(const Asynchronization& abstract_a, const std::shared_ptr<const AsyncSpace>& concrete) {
  if (concrete->size() != abstract_a.space().size())
    throw Error(ErrorCode::Unrepresentable, "abstraction changed the placement lattice");
  return {concrete, abstract_a.covered()};
}

}  // namespace asyncsynth
