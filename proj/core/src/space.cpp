#include "asyncsynth/space.hpp"

#include <algorithm>
#include <functional>

#include "asyncsynth/frontend.hpp"
#include "stmt_graph.hpp"

namespace asyncsynth {

using detail::AwaitInsert;

struct AsyncSpace::Impl {
  std::vector<std::map<StmtId, int>> unit_elem;                    // per call
  std::vector<std::map<StmtId, std::pair<int, int>>> if_range;     // per call
  std::vector<std::vector<int>> call_list_path;                    // per call
  std::vector<std::size_t> call_pos;
  std::vector<int> textual;  // pre-order rank of the call statement
  std::vector<std::vector<int>> up;
};

namespace {

const std::vector<Stmt>& arm(const Stmt& s, int a) { return a == 0 ? s.body : s.else_body; }

// Locates the body list holding `id` as (list path, index).
bool locate(const std::vector<Stmt>& list, const StmtId& id, std::vector<int>& path, std::size_t& pos) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i].id == id) {
      pos = i;
      return true;
    }
    for (int a = 0; a < 2; ++a) {
      path.push_back(static_cast<int>(i));
      path.push_back(a);
      if (locate(arm(list[i], a), id, path, pos)) return true;
      path.resize(path.size() - 2);
    }
  }
  return false;
}

// Awaits may go inside the arms of a conditional, but not inside a loop or a
// conditional that stands for one.
bool descends(const Stmt& s) { return s.kind == StmtKind::If && !s.from_loop; }

struct CallBuild {
  CallSite site;
  std::vector<PlacementElement> elems;
  std::map<StmtId, int> unit_elem;
  std::map<StmtId, std::pair<int, int>> if_range;
  std::vector<int> list_path;
  std::size_t pos = 0;
  int textual = 0;
};

// Adds the elements of `list[start..]`; returns true at a return barrier.
bool build_elems(const std::vector<Stmt>& list, std::size_t start, std::vector<int>& maxima, CallBuild& cb) {
  for (std::size_t i = start; i < list.size(); ++i) {
    const Stmt& s = list[i];
    if (detail::contains_return(s)) return true;
    if (!detail::has_counted(s)) continue;
    if (descends(s)) {
      int lo = static_cast<int>(cb.elems.size());
      std::vector<int> m1 = maxima, m2 = maxima;
      build_elems(s.body, 0, m1, cb);
      build_elems(s.else_body, 0, m2, cb);
      m1.insert(m1.end(), m2.begin(), m2.end());
      std::sort(m1.begin(), m1.end());
      m1.erase(std::unique(m1.begin(), m1.end()), m1.end());
      maxima = std::move(m1);
      cb.if_range[s.id] = {lo, static_cast<int>(cb.elems.size())};
      continue;
    }
    PlacementElement e;
    e.unit = s.id;
    detail::counted_in(s, e.stmts);
    e.preds = maxima;
    int idx = static_cast<int>(cb.elems.size());
    cb.unit_elem[s.id] = idx;
    cb.elems.push_back(std::move(e));
    maxima = {idx};
  }
  return false;
}

struct Placer {
  const AsyncSpace& space;
  const AsyncSpace::Impl& impl;
  const std::vector<bool>& covered;
  std::vector<AwaitInsert> out;

  bool is_covered(int k, int local) const { return covered[space.calls()[k].first + local]; }

  void place(const std::vector<Stmt>& list, std::size_t start, std::vector<int>& path, int k) {
    const CallSite& c = space.calls()[k];
    std::size_t gap = start;
    for (std::size_t i = start; i < list.size(); ++i) {
      const Stmt& s = list[i];
      if (detail::contains_return(s)) break;
      if (!detail::has_counted(s)) continue;
      if (!descends(s)) {
        if (!is_covered(k, impl.unit_elem[k].at(s.id))) break;
        gap = i + 1;
        continue;
      }
      auto [lo, hi] = impl.if_range[k].at(s.id);
      int n = 0;
      for (int e = lo; e < hi; ++e) n += is_covered(k, e);
      if (n == hi - lo) {
        gap = i + 1;
        continue;
      }
      if (n == 0) break;
      for (int a = 0; a < 2; ++a) {
        path.push_back(static_cast<int>(i));
        path.push_back(a);
        place(arm(s, a), 0, path, k);
        path.resize(path.size() - 2);
      }
      return;
    }
    out.push_back({c.method, path, gap, impl.textual[k], c.var});
  }
};

}  // namespace

AsyncSpace::AsyncSpace(const ProgramAst& p) : base_(erase_await_vars(p)) {
  const auto sigma = sigma_star(base_);
  std::vector<CallBuild> builds;
  int textual = 0;
  for (const auto& m : base_.methods) {
    for_each_stmt(m.body, [&](const Stmt& s) {
      if (s.kind != StmtKind::Call) return;
      ++textual;
      if (!sigma.count(s.callee)) return;
      CallBuild cb;
      cb.site = {s.id, m.name, s.local, s.callee, 0, 0};
      cb.textual = textual;
      locate(m.body, s.id, cb.list_path, cb.pos);
      builds.push_back(std::move(cb));
    });
  }
  for (auto& cb : builds) {
    const MethodDef* m = base_.find_method(cb.site.method);
    const std::vector<Stmt>* list = &m->body;
    for (std::size_t j = 0; j < cb.list_path.size(); j += 2) list = &arm((*list)[cb.list_path[j]], cb.list_path[j + 1]);
    std::vector<int> maxima;
    build_elems(*list, cb.pos + 1, maxima, cb);
  }

  auto install = [&](const std::vector<int>& order) {
    calls_.clear();
    elems_.clear();
    auto impl = std::make_shared<Impl>();
    for (int b : order) {
      CallBuild& cb = builds[b];
      const int k = static_cast<int>(calls_.size());
      const int off = static_cast<int>(elems_.size());
      CallSite site = cb.site;
      site.first = off;
      site.count = static_cast<int>(cb.elems.size());
      calls_.push_back(site);
      for (auto e : cb.elems) {
        e.call = k;
        for (auto& q : e.preds) q += off;
        elems_.push_back(std::move(e));
      }
      impl->unit_elem.push_back(cb.unit_elem);
      impl->if_range.push_back(cb.if_range);
      impl->call_list_path.push_back(cb.list_path);
      impl->call_pos.push_back(cb.pos);
      impl->textual.push_back(cb.textual);
    }
    for (std::size_t e = 0; e < elems_.size(); ++e)
      for (int q : elems_[e].preds) elems_[q].succs.push_back(static_cast<int>(e));
    impl->up.resize(elems_.size());
    for (int e = static_cast<int>(elems_.size()) - 1; e >= 0; --e) {
      std::set<int> u{e};
      for (int s : elems_[e].succs) u.insert(impl->up[s].begin(), impl->up[s].end());
      impl->up[e].assign(u.begin(), u.end());
    }
    impl_ = impl;
  };

  // Await order: methods callers first, then text order of the awaits in the
  // weakest asynchronization.
  std::vector<int> provisional(builds.size());
  for (std::size_t i = 0; i < builds.size(); ++i) provisional[i] = static_cast<int>(i);
  install(provisional);
  ProgramAst weakest = materialize(std::vector<bool>(elems_.size(), true));
  std::map<std::string, int> method_rank;
  {
    auto td = top_down_order(base_);
    for (std::size_t i = 0; i < td.size(); ++i) method_rank[td[i]] = static_cast<int>(i);
  }
  std::map<std::pair<std::string, std::string>, int> await_pos;
  int pos = 0;
  for (const auto& m : weakest.methods)
    for_each_stmt(m.body, [&](const Stmt& s) {
      if (s.kind == StmtKind::AwaitVar) await_pos[{m.name, s.local}] = pos++;
    });
  std::vector<int> order = provisional;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ca = builds[a].site;
    const auto& cb = builds[b].site;
    int ra = method_rank[ca.method], rb = method_rank[cb.method];
    if (ra != rb) return ra < rb;
    return await_pos.at({ca.method, ca.var}) < await_pos.at({cb.method, cb.var});
  });
  install(order);
}

int AsyncSpace::call_index(const StmtId& call) const {
  for (std::size_t k = 0; k < calls_.size(); ++k)
    if (calls_[k].call == call) return static_cast<int>(k);
  return -1;
}

int AsyncSpace::element_of(int call, const StmtId& stmt) const {
  const CallSite& c = calls_[call];
  for (int e = c.first; e < c.first + c.count; ++e)
    if (std::find(elems_[e].stmts.begin(), elems_[e].stmts.end(), stmt) != elems_[e].stmts.end()) return e;
  return -1;
}

bool AsyncSpace::is_downset(const std::vector<bool>& covered) const {
  if (covered.size() != elems_.size()) return false;
  for (std::size_t e = 0; e < elems_.size(); ++e)
    if (covered[e])
      for (int q : elems_[e].preds)
        if (!covered[q]) return false;
  return true;
}

std::vector<int> AsyncSpace::up_closure(int element) const { return impl_->up[element]; }

ProgramAst AsyncSpace::materialize(const std::vector<bool>& covered) const {
  Placer pl{*this, *impl_, covered, {}};
  for (std::size_t k = 0; k < calls_.size(); ++k) {
    const MethodDef* m = base_.find_method(calls_[k].method);
    const std::vector<Stmt>* list = &m->body;
    const auto& lp = impl_->call_list_path[k];
    for (std::size_t j = 0; j < lp.size(); j += 2) list = &arm((*list)[lp[j]], lp[j + 1]);
    std::vector<int> path = lp;
    pl.place(*list, impl_->call_pos[k] + 1, path, static_cast<int>(k));
  }
  ProgramAst q = base_;
  detail::apply_await_inserts(q, std::move(pl.out));
  return q;
}

// ---------------------------------------------------------------- Asynchronization

Asynchronization::Asynchronization(std::shared_ptr<const AsyncSpace> space, std::vector<bool> covered)
    : space_(std::move(space)), covered_(std::move(covered)) {}

Asynchronization::Asynchronization(std::shared_ptr<const AsyncSpace> space, std::vector<bool> covered,
                                   ProgramAst program)
    : space_(std::move(space)),
      covered_(std::move(covered)),
      program_(std::make_shared<const ProgramAst>(std::move(program))) {}

const ProgramAst& Asynchronization::program() const {
  if (!program_) program_ = std::make_shared<const ProgramAst>(space_->materialize(covered_));
  return *program_;
}

namespace {

std::map<StmtId, std::vector<StmtId>> placement_of(const ProgramAst& p, const AsyncSpace& space) {
  std::map<StmtId, std::vector<StmtId>> out;
  std::map<std::pair<std::string, std::string>, StmtId> call_of;
  for (const auto& c : space.calls()) {
    call_of[{c.method, c.var}] = c.call;
    out[c.call];
  }
  for (const auto& m : p.methods)
    for_each_stmt(m.body, [&](const Stmt& s) {
      if (s.kind != StmtKind::AwaitVar) return;
      auto it = call_of.find({m.name, s.local});
      if (it != call_of.end()) out[it->second].push_back(s.id);
    });
  return out;
}

}  // namespace

std::map<StmtId, std::vector<StmtId>> Asynchronization::placement() const { return placement_of(program(), *space_); }

Asynchronization strong_async(const std::shared_ptr<const AsyncSpace>& s) {
  return {s, std::vector<bool>(s->size(), false)};
}

Asynchronization weakest_async(const std::shared_ptr<const AsyncSpace>& s) {
  return {s, std::vector<bool>(s->size(), true)};
}

Asynchronization strong_async(const ProgramAst& p) { return strong_async(std::make_shared<const AsyncSpace>(p)); }
Asynchronization weakest_async(const ProgramAst& p) { return weakest_async(std::make_shared<const AsyncSpace>(p)); }

// ---------------------------------------------------------------- covers and order

CoverSet cover(const ProgramAst& q) {
  CoverSet out;
  for (const auto& m : q.methods) {
    std::map<std::string, StmtId> call_of;
    std::vector<const Stmt*> awaits;
    for_each_stmt(m.body, [&](const Stmt& s) {
      if (s.kind == StmtKind::Call) call_of[s.local] = s.id;
      if (s.kind == StmtKind::AwaitVar) awaits.push_back(&s);
    });
    if (awaits.empty()) continue;
    detail::StmtGraph g(m);
    for (const Stmt* w : awaits) {
      auto c = call_of.find(w->local);
      if (c == call_of.end()) continue;
      const std::string& r = w->local;
      auto stop = [&](const StmtId& n) {
        if (n == c->second) return true;
        const Stmt* s = g.stmt.count(n) ? g.stmt.at(n) : nullptr;
        return s && s->kind == StmtKind::AwaitVar && s->local == r;
      };
      auto fwd = g.reach(c->second, false, stop);
      auto bwd = g.reach(w->id, true, stop);
      auto& cov = out[w->id];
      for (const auto& n : fwd) {
        if (!bwd.count(n)) continue;
        const Stmt* s = g.stmt.count(n) ? g.stmt.at(n) : nullptr;
        if (s && detail::is_counted(*s) && n != c->second) cov.insert(n);
      }
    }
  }
  return out;
}

CoverSet cover(const Asynchronization& a) { return cover(a.program()); }

bool leq(const Asynchronization& a, const Asynchronization& b) {
  if (&a.space() != &b.space() && !structurally_equal(a.space().base(), b.space().base()))
    throw Error(ErrorCode::DifferentBase, "asynchronizations of different programs are not comparable");
  const auto& x = a.covered();
  const auto& y = b.covered();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] && !y[i]) return false;
  return true;
}

std::vector<Move> immediate_predecessors(const Asynchronization& a) {
  std::vector<Move> out;
  const auto& s = a.space();
  const auto& cov = a.covered();
  for (std::size_t e = 0; e < s.size(); ++e) {
    if (!cov[e]) continue;
    const auto& succs = s.elements()[e].succs;
    if (std::any_of(succs.begin(), succs.end(), [&](int f) { return cov[f]; })) continue;
    auto bits = cov;
    bits[e] = false;
    out.push_back({a.with(std::move(bits)), s.elements()[e].call, static_cast<int>(e)});
  }
  return out;
}

std::vector<StmtId> await_order(const AsyncSpace& s) {
  auto w = weakest_async(std::shared_ptr<const AsyncSpace>(&s, [](const AsyncSpace*) {}));
  auto pl = w.placement();
  std::vector<StmtId> out;
  for (const auto& c : s.calls())
    for (const auto& id : pl[c.call]) out.push_back(id);
  return out;
}

std::vector<Move> next_ele(const Asynchronization& a, int bound) {
  auto all = immediate_predecessors(a);
  std::vector<Move> out;
  for (auto& m : all)
    if (m.element < bound) out.push_back(std::move(m));
  return out;
}

std::vector<int> distance_vector(const Asynchronization& a) {
  auto cov = cover(a);
  auto pl = a.placement();
  std::vector<int> out;
  for (const auto& c : a.space().calls())
    for (const auto& w : pl[c.call]) out.push_back(static_cast<int>(cov[w].size()));
  return out;
}

std::vector<Asynchronization> all_downsets(const std::shared_ptr<const AsyncSpace>& s, std::size_t limit) {
  std::vector<Asynchronization> out;
  std::vector<bool> bits(s->size(), false);
  std::function<void(std::size_t)> rec = [&](std::size_t e) {
    if (e == s->size()) {
      if (out.size() >= limit) throw Error(ErrorCode::SpaceBudgetExceeded, "too many asynchronizations");
      out.emplace_back(s, bits);
      return;
    }
    rec(e + 1);
    const auto& preds = s->elements()[e].preds;
    if (std::all_of(preds.begin(), preds.end(), [&](int q) { return bits[q]; })) {
      bits[e] = true;
      rec(e + 1);
      bits[e] = false;
    }
  };
  rec(0);
  return out;
}

// ---------------------------------------------------------------- brute force

namespace {

// Element bits of call `c` for a set of covered statements.
std::vector<bool> bits_for(const AsyncSpace& space, const CallSite& c, const std::set<StmtId>& covered) {
  std::vector<bool> bits(c.count, false);
  std::size_t used = 0;
  for (int e = 0; e < c.count; ++e) {
    const auto& st = space.elements()[c.first + e].stmts;
    std::size_t n = std::count_if(st.begin(), st.end(), [&](const StmtId& s) { return covered.count(s) > 0; });
    if (n != 0 && n != st.size())
      throw Error(ErrorCode::Unrepresentable, "an await after " + c.call.str() + " covers part of a loop");
    bits[e] = n != 0;
    used += n;
  }
  if (used != covered.size())
    throw Error(ErrorCode::Unrepresentable, "an await after " + c.call.str() + " covers statements past a return");
  return bits;
}

struct Gap {
  std::vector<int> list_path;
  std::size_t pos;
};

bool holds(const Stmt& s, const StmtId& id) {
  bool found = false;
  for_each_stmt(s.body, [&](const Stmt& t) { found |= t.id == id; });
  for_each_stmt(s.else_body, [&](const Stmt& t) { found |= t.id == id; });
  return found;
}

// A conditional standing for a loop gets the treatment of a loop: awaits of
// calls outside it never go inside (they would run once per iteration).
void collect_gaps(const std::vector<Stmt>& list, const StmtId& call, std::vector<int>& path, std::vector<Gap>& out) {
  for (std::size_t i = 0; i <= list.size(); ++i) out.push_back({path, i});
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Stmt& s = list[i];
    int arms = s.kind == StmtKind::If ? 2 : s.kind == StmtKind::While ? 1 : 0;
    if (s.from_loop && !holds(s, call)) arms = 0;
    for (int a = 0; a < arms; ++a) {
      path.push_back(static_cast<int>(i));
      path.push_back(a);
      collect_gaps(arm(s, a), call, path, out);
      path.resize(path.size() - 2);
    }
  }
}

// Every path from the call meets exactly one await of `r` before the exit or
// the next execution of the call, and no await is reachable otherwise.
bool matches_once(const MethodDef& m, const StmtId& call, const std::string& r) {
  detail::StmtGraph g(m);
  std::vector<StmtId> awaits;
  for (const auto& [id, s] : g.stmt)
    if (s->kind == StmtKind::AwaitVar && s->local == r) awaits.push_back(id);
  auto is_await = [&](const StmtId& n) {
    return std::find(awaits.begin(), awaits.end(), n) != awaits.end();
  };
  auto from_call = g.reach(call, false, [&](const StmtId& n) { return n == call || is_await(n); });
  if (from_call.count(g.exit) || from_call.count(call)) return false;
  for (const auto& w : awaits) {
    if (!from_call.count(w)) return false;
    auto after = g.reach(w, false, [&](const StmtId& n) { return n == call || is_await(n); });
    if (std::any_of(awaits.begin(), awaits.end(), [&](const StmtId& v) { return after.count(v) > 0; })) return false;
  }
  // Dominance: no await is reachable from the entry without the call.
  std::set<StmtId> from_entry{g.entry};
  if (g.entry != call) {
    auto rest = g.reach(g.entry, false, [&](const StmtId& n) { return n == call; });
    from_entry.insert(rest.begin(), rest.end());
  } else {
    from_entry.clear();
  }
  return std::none_of(awaits.begin(), awaits.end(), [&](const StmtId& w) { return from_entry.count(w) > 0; });
}

}  // namespace

std::vector<Asynchronization> all_asyncs_bruteforce(const ProgramAst& p, std::size_t limit) {
  auto space = std::make_shared<const AsyncSpace>(p);
  const ProgramAst& base = space->base();
  const auto& calls = space->calls();

  // Per call: distinct element sets reachable by some raw placement, each with
  // the first placement that produced it.
  std::vector<std::vector<std::pair<std::vector<bool>, std::vector<Gap>>>> options(calls.size());
  for (std::size_t k = 0; k < calls.size(); ++k) {
    const CallSite& c = calls[k];
    const MethodDef* m = base.find_method(c.method);
    std::vector<Gap> gaps;
    std::vector<int> path;
    collect_gaps(m->body, c.call, path, gaps);
    auto program_with = [&](const std::vector<Gap>& gs) {
      ProgramAst q = base;
      std::vector<AwaitInsert> ins;
      for (const auto& g : gs) ins.push_back({c.method, g.list_path, g.pos, 0, c.var});
      detail::apply_await_inserts(q, std::move(ins));
      return q;
    };
    // A single await at a viable gap is reachable only through the call.
    std::vector<Gap> viable;
    for (const auto& g : gaps) {
      ProgramAst q = program_with({g});
      detail::StmtGraph sg(*q.find_method(c.method));
      StmtId wid;
      for (const auto& [id, s] : sg.stmt)
        if (s->kind == StmtKind::AwaitVar) wid = id;
      auto from_entry = sg.reach(sg.entry, false, [&](const StmtId& n) { return n == c.call; });
      from_entry.insert(sg.entry);
      if (sg.entry == c.call || !from_entry.count(wid)) {
        auto from_call = sg.reach(c.call, false, [&](const StmtId& n) { return n == c.call; });
        if (from_call.count(wid)) viable.push_back(g);
      }
    }
    int ifs = 0;
    for_each_stmt(m->body, [&](const Stmt& s) { ifs += s.kind == StmtKind::If; });
    const std::size_t max_awaits = std::min<std::size_t>(static_cast<std::size_t>(ifs) + 1, 4);

    std::map<std::vector<bool>, std::vector<Gap>> found;
    std::vector<Gap> chosen;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
      if (!chosen.empty()) {
        ProgramAst q = program_with(chosen);
        const MethodDef* qm = q.find_method(c.method);
        if (matches_once(*qm, c.call, c.var)) {
          std::set<StmtId> covered;
          for (const auto& [w, cs] : cover(q)) covered.insert(cs.begin(), cs.end());
          auto bits = bits_for(*space, c, covered);
          found.emplace(bits, chosen);
        }
      }
      if (chosen.size() == max_awaits) return;
      for (std::size_t i = from; i < viable.size(); ++i) {
        chosen.push_back(viable[i]);
        rec(i + 1);
        chosen.pop_back();
      }
    };
    rec(0);
    options[k].assign(found.begin(), found.end());
  }

  std::vector<Asynchronization> out;
  std::vector<std::size_t> pick(calls.size(), 0);
  std::function<void(std::size_t)> product = [&](std::size_t k) {
    if (k == calls.size()) {
      if (out.size() >= limit) throw Error(ErrorCode::SpaceBudgetExceeded, "too many asynchronizations");
      std::vector<bool> bits(space->size(), false);
      std::vector<AwaitInsert> ins;
      for (std::size_t j = 0; j < calls.size(); ++j) {
        const auto& [b, gs] = options[j][pick[j]];
        for (int e = 0; e < calls[j].count; ++e) bits[calls[j].first + e] = b[e];
        for (const auto& g : gs) ins.push_back({calls[j].method, g.list_path, g.pos, static_cast<int>(j), calls[j].var});
      }
      ProgramAst q = base;
      detail::apply_await_inserts(q, std::move(ins));
      out.emplace_back(space, std::move(bits), std::move(q));
      return;
    }
    for (pick[k] = 0; pick[k] < options[k].size(); ++pick[k]) product(k + 1);
  };
  product(0);
  std::sort(out.begin(), out.end());
  return out;
}

Asynchronization asynchronization_of(const ProgramAst& p) {
  auto space = std::make_shared<const AsyncSpace>(p);
  const auto cov = cover(p);
  auto pl = placement_of(p, *space);
  std::vector<bool> bits(space->size(), false);
  for (const auto& c : space->calls()) {
    std::set<StmtId> covered;
    for (const auto& w : pl[c.call]) {
      auto it = cov.find(w);
      if (it != cov.end()) covered.insert(it->second.begin(), it->second.end());
    }
    auto b = bits_for(*space, c, covered);
    for (int e = 0; e < c.count; ++e) bits[c.first + e] = b[e];
  }
  if (!space->is_downset(bits)) throw Error(ErrorCode::Unrepresentable, "await placement is not a lattice element");
  return {space, std::move(bits), p};
}

}  // namespace asyncsynth
