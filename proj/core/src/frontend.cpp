#include <algorithm>
#include <functional>
#include <sstream>

#include "asyncsynth/frontend.hpp"

namespace asyncsynth {

// ---------------------------------------------------------------- printing

namespace {

void print_body(std::ostringstream& out, const std::vector<Stmt>& body, int depth);

void print_block(std::ostringstream& out, const std::vector<Stmt>& body, int depth) {
  if (body.empty()) {
    out << "{ }";
    return;
  }
  out << "{\n";
  print_body(out, body, depth + 1);
  out << std::string(2 * depth, ' ') << "}";
}

void print_body(std::ostringstream& out, const std::vector<Stmt>& body, int depth) {
  const std::string pad(2 * depth, ' ');
  for (const auto& s : body) {
    out << pad;
    switch (s.kind) {
      case StmtKind::Write: out << s.global << " := " << expr_str(*s.expr) << ";"; break;
      case StmtKind::Read: out << s.local << " := " << s.global << ";"; break;
      case StmtKind::Call: out << s.local << " := call " << s.callee << ";"; break;
      case StmtKind::Return: out << "return;"; break;
      case StmtKind::AwaitVar: out << "await " << s.local << ";"; break;
      case StmtKind::AwaitStar: out << "await *;"; break;
      case StmtKind::Assign: out << "let " << s.local << " := " << expr_str(*s.expr) << ";"; break;
      case StmtKind::Assert: out << "assert (" << expr_str(*s.expr) << ");"; break;
      case StmtKind::If:
        out << "if (" << expr_str(*s.expr) << ") ";
        print_block(out, s.body, depth);
        if (s.has_else) {
          out << " else ";
          print_block(out, s.else_body, depth);
        }
        break;
      case StmtKind::While:
        out << "while (" << expr_str(*s.expr) << ") ";
        print_block(out, s.body, depth);
        break;
    }
    out << "\n";
  }
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
  return out;
}

}  // namespace

std::string pretty_print(const ProgramAst& p) {
  std::ostringstream out;
  if (!p.globals.empty()) out << "globals " << join(p.globals) << ";\n";
  if (!p.asyncify.empty()) out << "asyncify " << join(p.asyncify) << ";\n";
  for (const auto& m : p.methods) {
    out << "\n" << (m.is_async ? "async method " : "method ") << m.name << " ";
    print_block(out, m.body, 0);
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------- CFG

namespace {

class CfgBuilder {
 public:
  Cfg build(const MethodDef& m) {
    cur_ = fresh();
    seq(m.body);
    finish();
    return std::move(cfg_);
  }

 private:
  Cfg cfg_;
  int cur_ = 0;

  int fresh() {
    cfg_.blocks.emplace_back();
    return static_cast<int>(cfg_.blocks.size()) - 1;
  }
  void edge(int a, int b) {
    cfg_.blocks[a].succ.push_back(b);
    cfg_.blocks[b].pred.push_back(a);
    cfg_.edges.push_back({a, b});
  }
  void put(const Stmt& s) {
    cfg_.blocks[cur_].stmts.push_back(s.id);
    cfg_.block_of[s.id] = cur_;
  }

  void seq(const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      if (s.kind == StmtKind::If) {
        put(s);
        int head = cur_;
        int then_b = fresh(), else_b = fresh();
        edge(head, then_b);
        edge(head, else_b);
        cur_ = then_b;
        seq(s.body);
        int then_end = cur_;
        cur_ = else_b;
        seq(s.else_body);
        int else_end = cur_;
        int join = fresh();
        edge(then_end, join);
        edge(else_end, join);
        cur_ = join;
      } else if (s.kind == StmtKind::While) {
        int header = cur_;
        if (!cfg_.blocks[cur_].stmts.empty()) {
          header = fresh();
          edge(cur_, header);
        }
        cur_ = header;
        put(s);
        int body = fresh();
        edge(header, body);
        cur_ = body;
        seq(s.body);
        edge(cur_, header);
        int exit = fresh();
        edge(header, exit);
        cur_ = exit;
      } else if (s.kind == StmtKind::Return) {
        put(s);
        // Anything after a return is unreachable.
        cur_ = fresh();
      } else {
        put(s);
      }
    }
  }

  void finish() {
    const int n = static_cast<int>(cfg_.blocks.size());
    // DFS for reverse postorder and back edges.
    std::vector<int> state(n, 0), post;
    std::function<void(int)> dfs = [&](int b) {
      state[b] = 1;
      for (int s : cfg_.blocks[b].succ) {
        if (state[s] == 1) cfg_.back_edges.insert({b, s});
        else if (state[s] == 0) dfs(s);
      }
      state[b] = 2;
      post.push_back(b);
    };
    dfs(cfg_.entry);
    std::vector<int> rpo(post.rbegin(), post.rend());
    std::vector<int> order(n, -1);
    for (int i = 0; i < static_cast<int>(rpo.size()); ++i) order[rpo[i]] = i;

    auto& idom = cfg_.idom;
    idom.assign(n, -1);
    idom[cfg_.entry] = cfg_.entry;
    auto intersect = [&](int a, int b) {
      while (a != b) {
        while (order[a] > order[b]) a = idom[a];
        while (order[b] > order[a]) b = idom[b];
      }
      return a;
    };
    for (bool changed = true; changed;) {
      changed = false;
      for (int b : rpo) {
        if (b == cfg_.entry) continue;
        int nd = -1;
        for (int p : cfg_.blocks[b].pred) {
          if (idom[p] < 0) continue;
          nd = nd < 0 ? p : intersect(p, nd);
        }
        if (nd != idom[b]) {
          idom[b] = nd;
          changed = true;
        }
      }
    }
    for (int b = 0; b < n; ++b)
      if (state[b] && cfg_.blocks[b].succ.empty()) cfg_.exits.push_back(b);
  }
};

}  // namespace

bool Cfg::dominates(int a, int b) const {
  if (idom[b] < 0) return false;
  for (;;) {
    if (a == b) return true;
    if (b == entry) return false;
    b = idom[b];
  }
}

Cfg build_cfg(const MethodDef& m) { return CfgBuilder().build(m); }

// ---------------------------------------------------------------- checks

int Violation::condition() const {
  switch (kind) {
    case ViolationKind::DistinctVariable: return 1;
    case ViolationKind::Dominance: return 2;
    case ViolationKind::AwaitOnAllPaths: return 3;
    default: return 0;
  }
}

std::string_view Violation::code() const {
  switch (kind) {
    case ViolationKind::DistinctVariable: return "condition-1";
    case ViolationKind::Dominance: return "condition-2";
    case ViolationKind::AwaitOnAllPaths: return "condition-3";
    case ViolationKind::UnmatchedAwait: return "unmatched-await";
    case ViolationKind::MisplacedReturn: return "misplaced-return";
    case ViolationKind::MissingElse: return "missing-else";
  }
  return "violation";
}

std::set<std::string> sigma_star(const ProgramAst& p, const std::set<std::string>& lambda) {
  std::set<std::string> out;
  for (const auto& n : lambda)
    if (p.find_method(n)) out.insert(n);
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& m : p.methods) {
      if (out.count(m.name)) continue;
      bool calls = false;
      for_each_stmt(m.body, [&](const Stmt& s) { calls = calls || (s.kind == StmtKind::Call && out.count(s.callee)); });
      if (calls) {
        out.insert(m.name);
        grew = true;
      }
    }
  }
  return out;
}

std::set<std::string> sigma_star(const ProgramAst& p) { return sigma_star(p, p.lambda()); }

std::vector<std::string> top_down_order(const ProgramAst& p) {
  const std::size_t n = p.methods.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[p.methods[i].name] = i;
  std::vector<std::set<std::size_t>> callees(n);
  std::vector<int> indeg(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for_each_stmt(p.methods[i].body, [&](const Stmt& s) {
      if (s.kind == StmtKind::Call && index.count(s.callee)) callees[i].insert(index[s.callee]);
    });
  for (const auto& cs : callees)
    for (auto c : cs) ++indeg[c];
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (!indeg[i]) ready.insert(i);
  std::vector<std::string> out;
  while (!ready.empty()) {
    std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    out.push_back(p.methods[i].name);
    for (auto c : callees[i])
      if (--indeg[c] == 0) ready.insert(c);
  }
  return out;
}

namespace {

void collect(const std::vector<Stmt>& body, std::vector<const Stmt*>& out) {
  for_each_stmt(body, [&](const Stmt& s) { out.push_back(&s); });
}

void misplaced_returns(const MethodDef& m, std::vector<Violation>& out) {
  for_each_stmt(m.body, [&](const Stmt& s) {
    if (s.kind != StmtKind::Return) return;
    bool last_top = s.id.path.size() == 1 && !m.body.empty() && &m.body.back() == &s;
    if (!last_top)
      out.push_back({ViolationKind::MisplacedReturn, m.name, {s.id}, s.loc,
                     "return is only allowed as the last statement of a method body"});
  });
}

// Is there a path from just after `from` to the method exit avoiding every `await r`?
bool escapes_without_await(const Cfg& cfg, const StmtId& from, const std::string& r,
                           const std::map<StmtId, const Stmt*>& by_id) {
  int b0 = cfg.block_of.at(from);
  const auto& st0 = cfg.blocks[b0].stmts;
  std::size_t start = std::find(st0.begin(), st0.end(), from) - st0.begin() + 1;
  std::vector<std::pair<int, std::size_t>> work{{b0, start}};
  std::set<int> seen;
  while (!work.empty()) {
    auto [b, i] = work.back();
    work.pop_back();
    const auto& st = cfg.blocks[b].stmts;
    bool blocked = false;
    for (std::size_t k = i; k < st.size() && !blocked; ++k) {
      const Stmt* s = by_id.at(st[k]);
      blocked = s->kind == StmtKind::AwaitVar && s->local == r;
    }
    if (blocked) continue;
    if (cfg.blocks[b].succ.empty()) return true;
    for (int s : cfg.blocks[b].succ)
      if (seen.insert(s).second) work.push_back({s, 0});
  }
  return false;
}

}  // namespace

std::vector<Violation> check_well_formed(const ProgramAst& p) {
  std::vector<Violation> out;
  const auto sigma = sigma_star(p);
  const bool asynchronized = has_await_vars(p);
  for (const auto& m : p.methods) {
    misplaced_returns(m, out);
    std::vector<const Stmt*> all;
    collect(m.body, all);
    std::map<StmtId, const Stmt*> by_id;
    for (auto* s : all) by_id[s->id] = s;
    std::map<std::string, std::vector<const Stmt*>> calls_of, awaits_of;
    for (auto* s : all) {
      if (s->kind == StmtKind::Call) calls_of[s->local].push_back(s);
      if (s->kind == StmtKind::AwaitVar) awaits_of[s->local].push_back(s);
    }
    for (const auto& [r, aws] : awaits_of)
      if (!calls_of.count(r))
        for (auto* a : aws)
          out.push_back({ViolationKind::UnmatchedAwait, m.name, {a->id}, a->loc,
                         "await on '" + r + "' which is not bound by any call"});
    if (!m.is_async && !sigma.count(m.name)) continue;

    for (const auto& [r, cs] : calls_of)
      if (cs.size() > 1) {
        std::vector<StmtId> ids;
        for (auto* c : cs) ids.push_back(c->id);
        out.push_back({ViolationKind::DistinctVariable, m.name, ids, cs[1]->loc,
                       "task variable '" + r + "' is bound by more than one call"});
      }

    Cfg cfg = build_cfg(m);
    for (const auto& [r, cs] : calls_of) {
      if (cs.size() != 1) continue;
      const Stmt* c = cs[0];
      auto it = awaits_of.find(r);
      int cb = cfg.block_of.at(c->id);
      if (it != awaits_of.end()) {
        for (auto* a : it->second) {
          int ab = cfg.block_of.at(a->id);
          bool ok = cfg.dominates(cb, ab);
          if (ok && ab == cb) {
            const auto& st = cfg.blocks[cb].stmts;
            ok = std::find(st.begin(), st.end(), c->id) < std::find(st.begin(), st.end(), a->id);
          }
          if (!ok)
            out.push_back({ViolationKind::Dominance, m.name, {c->id, a->id}, a->loc,
                           "await " + r + " is not dominated by its call"});
        }
      }
      bool needs_await = it != awaits_of.end() || (asynchronized && sigma.count(c->callee));
      if (needs_await && escapes_without_await(cfg, c->id, r, by_id))
        out.push_back({ViolationKind::AwaitOnAllPaths, m.name, {c->id}, c->loc,
                       "some path from call " + c->id.str() + " reaches the exit without 'await " + r + "'"});
    }
  }
  return out;
}

std::vector<Violation> strict_findings(const ProgramAst& p) {
  std::vector<Violation> out;
  for_each_stmt(p, [&](const MethodDef& m, const Stmt& s) {
    if (s.kind == StmtKind::If && !s.has_else && !s.from_loop)
      out.push_back({ViolationKind::MissingElse, m.name, {s.id}, s.loc,
                     "conditional without else; treated as an empty else branch"});
  });
  return out;
}

std::map<StmtId, std::set<StmtId>> matching_await_map(const ProgramAst& p) {
  std::map<StmtId, std::set<StmtId>> out;
  const auto sigma = sigma_star(p);
  for (const auto& m : p.methods) {
    std::map<std::string, StmtId> binder;
    for_each_stmt(m.body, [&](const Stmt& s) {
      if (s.kind != StmtKind::Call) return;
      binder.emplace(s.local, s.id);
      if (sigma.count(s.callee)) out[s.id];
    });
    for_each_stmt(m.body, [&](const Stmt& s) {
      if (s.kind != StmtKind::AwaitVar) return;
      auto it = binder.find(s.local);
      if (it == binder.end())
        throw Error(ErrorCode::UnmatchedAwait, "await on '" + s.local + "' which is not bound by any call", s.loc);
      out[it->second].insert(s.id);
    });
  }
  return out;
}

}  // namespace asyncsynth
