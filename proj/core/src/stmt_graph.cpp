#include "stmt_graph.hpp"

#include <algorithm>

namespace asyncsynth::detail {

StmtGraph::StmtGraph(const MethodDef& m) {
  exit = StmtId::exit_of(m.name);
  entry = m.body.empty() ? exit : m.body.front().id;
  succ[exit];
  std::function<void(const std::vector<Stmt>&, const StmtId&)> link = [&](const std::vector<Stmt>& body,
                                                                          const StmtId& k) {
    for (std::size_t i = 0; i < body.size(); ++i) {
      const Stmt& s = body[i];
      stmt[s.id] = &s;
      const StmtId& next = i + 1 < body.size() ? body[i + 1].id : k;
      auto& out = succ[s.id];
      switch (s.kind) {
        case StmtKind::If:
          out.push_back(s.body.empty() ? next : s.body.front().id);
          out.push_back(s.else_body.empty() ? next : s.else_body.front().id);
          link(s.body, next);
          link(s.else_body, next);
          break;
        case StmtKind::While:
          if (!s.body.empty()) out.push_back(s.body.front().id);
          out.push_back(next);
          link(s.body, s.id);
          break;
        case StmtKind::Return: out.push_back(exit); break;
        default: out.push_back(next);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
    }
  };
  link(m.body, exit);
  for (const auto& [n, ss] : succ)
    for (const auto& t : ss) pred[t].push_back(n);
  pred[entry];
}

std::set<StmtId> StmtGraph::reach(const StmtId& from, bool backward,
                                  const std::function<bool(const StmtId&)>& block) const {
  const auto& adj = backward ? pred : succ;
  std::set<StmtId> seen;
  std::deque<StmtId> work;
  auto expand = [&](const StmtId& n) {
    auto it = adj.find(n);
    if (it == adj.end()) return;
    for (const auto& t : it->second)
      if (seen.insert(t).second && !block(t)) work.push_back(t);
  };
  expand(from);
  while (!work.empty()) {
    StmtId n = std::move(work.front());
    work.pop_front();
    expand(n);
  }
  return seen;
}

bool contains_return(const Stmt& s) {
  if (s.kind == StmtKind::Return) return true;
  for (const auto& b : s.body)
    if (contains_return(b)) return true;
  for (const auto& b : s.else_body)
    if (contains_return(b)) return true;
  return false;
}

bool has_counted(const Stmt& s) {
  if (is_counted(s)) return true;
  for (const auto& b : s.body)
    if (has_counted(b)) return true;
  for (const auto& b : s.else_body)
    if (has_counted(b)) return true;
  return false;
}

void counted_in(const Stmt& s, std::vector<StmtId>& out) {
  if (is_counted(s)) out.push_back(s.id);
  for (const auto& b : s.body) counted_in(b, out);
  for (const auto& b : s.else_body) counted_in(b, out);
}

void apply_await_inserts(ProgramAst& p, std::vector<AwaitInsert> ins) {
  // Deeper lists first so that the index paths of later insertions stay valid.
  std::sort(ins.begin(), ins.end(), [](const AwaitInsert& a, const AwaitInsert& b) {
    if (a.list_path.size() != b.list_path.size()) return a.list_path.size() > b.list_path.size();
    if (a.method != b.method) return a.method < b.method;
    if (a.list_path != b.list_path) return a.list_path < b.list_path;
    if (a.pos != b.pos) return a.pos > b.pos;
    return a.order > b.order;
  });
  for (const auto& i : ins) {
    MethodDef* m = p.find_method(i.method);
    std::vector<Stmt>* list = &m->body;
    for (std::size_t j = 0; j + 1 < i.list_path.size(); j += 2) {
      Stmt& s = (*list)[i.list_path[j]];
      if (i.list_path[j + 1] == 0) {
        list = &s.body;
      } else {
        s.has_else = true;
        list = &s.else_body;
      }
    }
    Stmt w;
    w.kind = StmtKind::AwaitVar;
    w.local = i.var;
    list->insert(list->begin() + static_cast<std::ptrdiff_t>(i.pos), std::move(w));
  }
  finalize(p);
}

}  // namespace asyncsynth::detail
