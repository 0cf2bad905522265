#include "asyncsynth/traces.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <tuple>

#include "asyncsynth/frontend.hpp"
#include "race_visitor.hpp"

namespace asyncsynth {

// ---------------------------------------------------------------- Relation

bool Relation::contains(const Relation& o) const {
  for (std::size_t i = 0; i < o.bits_.size(); ++i)
    if (o.bits_[i] & ~bits_[i]) return false;
  return true;
}

bool Relation::irreflexive() const {
  for (std::size_t i = 0; i < n_; ++i)
    if (test(i, i)) return false;
  return true;
}

bool Relation::transitive() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      if (!test(i, j)) continue;
      for (std::size_t k = 0; k < n_; ++k)
        if (test(j, k) && !test(i, k)) return false;
    }
  return true;
}

std::size_t Relation::count() const {
  std::size_t c = 0;
  for (auto w : bits_) c += static_cast<std::size_t>(__builtin_popcountll(w));
  return c;
}

// ---------------------------------------------------------------- orders

namespace detail {

void HbTracker::push(const Action& a) {
  const int i = static_cast<int>(path_.size());
  if (static_cast<int>(tasks_.size()) <= std::max(a.task, a.target)) tasks_.resize(std::max(a.task, a.target) + 1);
  TaskState& t = tasks_[a.task];
  Entry e;
  e.a = a;
  e.mo_index = static_cast<int>(t.actions.size());
  e.key = t.prefix;
  e.key.push_back(e.mo_index);
  e.hb.resize(i);
  auto add = [&](int q) {
    if (q < 0) return;
    boost::dynamic_bitset<> tmp = path_[q].hb;
    tmp.resize(i);
    e.hb |= tmp;
    e.hb.set(q);
  };
  if (!t.actions.empty()) {
    const int p = t.actions.back();
    add(p);
    const Action& pa = path_[p].a;
    if (pa.kind == EventKind::Await && pa.target > 0) add(last_action(pa.target));
    if (pa.kind == EventKind::Call) {
      const TaskState& c = tasks_[pa.target];
      if (!threads_) add(c.first_await >= 0 ? c.first_await : last_action(pa.target));
      else if (!spawns_[pa.stmt]) add(last_action(pa.target));
    }
  } else {
    add(t.call_action);
  }
  if (a.kind == EventKind::Await && t.first_await < 0) t.first_await = i;
  if (a.kind == EventKind::Call) {
    TaskState& c = tasks_[a.target];
    c = TaskState{};
    c.parent = a.task;
    c.call_action = i;
    c.prefix = e.key;
  }
  t.actions.push_back(i);
  path_.push_back(std::move(e));
}

void HbTracker::pop() {
  const int i = static_cast<int>(path_.size()) - 1;
  const Action& a = path_.back().a;
  TaskState& t = tasks_[a.task];
  t.actions.pop_back();
  if (t.first_await == i) t.first_await = -1;
  if (a.kind == EventKind::Call) tasks_[a.target] = TaskState{};
  path_.pop_back();
}

int HbTracker::last_action(TaskId t) const {
  if (t <= 0 || t >= static_cast<int>(tasks_.size()) || tasks_[t].actions.empty()) return -1;
  return tasks_[t].actions.back();
}

bool HbTracker::so_less(int i, int j) const {
  const auto& a = path_[i].key;
  const auto& b = path_[j].key;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool HbTracker::co(int i, int j) const {
  const auto& a = path_[i].key;
  const auto& b = path_[j].key;
  if (b.size() < a.size()) return false;
  if (!std::equal(a.begin(), a.end() - 1, b.begin())) return false;
  if (b.size() == a.size()) return a.back() < b.back();
  return a.back() <= b[a.size() - 1];
}

bool HbTracker::ancestor_or_self(TaskId anc, TaskId t) const {
  for (; t > 0; t = tasks_[t].parent)
    if (t == anc) return true;
  return false;
}

TaskId HbTracker::child_toward(TaskId anc, TaskId t) const {
  while (t > 0 && tasks_[t].parent != anc) t = tasks_[t].parent;
  return t;
}

int HbTracker::lca_call(int a1, int a2) const {
  TaskId t1 = path_[a1].a.task, t2 = path_[a2].a.task;
  TaskId l = t1;
  while (l > 0 && !ancestor_or_self(l, t2)) l = tasks_[l].parent;
  if (l == t1) return -1;
  return tasks_[child_toward(l, t1)].call_action;
}

std::optional<std::pair<int, int>> HbTracker::root_cause(int a1, int a2) const {
  int call = lca_call(a1, a2);
  if (call < 0) return std::nullopt;
  TaskId l = path_[call].a.task;
  TaskId t2 = path_[a2].a.task;
  int anchor = t2 == l ? a2 : tasks_[child_toward(l, t2)].call_action;
  return std::make_pair(call, anchor);
}

}  // namespace detail

namespace {

detail::HbTracker track(const Execution& e) {
  detail::HbTracker h;
  for (const auto& a : e.actions) h.push(a);
  return h;
}

}  // namespace

namespace detail {

Trace orders_from(const Execution& e, HbTracker h) {
  for (const auto& a : e.actions) h.push(a);
  Trace t;
  t.exec = e;
  const std::size_t n = e.actions.size();
  t.mo = Relation(n);
  t.co = Relation(n);
  t.so = Relation(n);
  t.hb = Relation(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& hb = h.hbpred(static_cast<int>(j));
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      if (e.actions[i].task == e.actions[j].task && i < j) t.mo.set(i, j);
      if (h.co(static_cast<int>(i), static_cast<int>(j))) t.co.set(i, j);
      if (h.so_less(static_cast<int>(i), static_cast<int>(j))) t.so.set(i, j);
      if (i < j && hb.test(i)) t.hb.set(i, j);
    }
  }
  return t;
}

}  // namespace detail

Trace compute_orders(const Execution& e) { return detail::orders_from(e, {}); }

int lca_call_action(const Execution& e, int a1, int a2) { return track(e).lca_call(a1, a2); }

RootCause root_cause(const Execution& e, int a1, int a2) {
  auto h = track(e);
  auto rc = h.root_cause(a1, a2);
  if (!rc) throw Error(ErrorCode::InvalidRootCause, "actions share no asynchronous call ancestor");
  const auto& stmts = e.index->stmts;
  return {stmts[e.actions[rc->first].stmt], stmts[e.actions[rc->second].stmt]};
}

// ---------------------------------------------------------------- races

namespace detail {

void sort_races(std::vector<DataRace>& races) {
  std::sort(races.begin(), races.end(), [](const DataRace& a, const DataRace& b) {
    return std::tie(a.second_stmt, a.first_stmt, a.var) < std::tie(b.second_stmt, b.first_stmt, b.var);
  });
}

}  // namespace detail

RaceSearch find_data_races(const ProgramAst& p, const ExplorationConfig& cfg, std::size_t limit) {
  Interpreter in(p, cfg, RunMode::Async);
  detail::RaceVisitor v(in.shared_index(), limit);
  v.out.states = in.explore(v);
  detail::sort_races(v.out.races);
  return std::move(v.out);
}

std::set<StmtId> synchronously_reachable(const ProgramAst& p_sync, const ExplorationConfig& cfg) {
  return run_synchronous(p_sync, cfg).reached;
}

// ---------------------------------------------------------------- statement order

ForwardReach::ForwardReach(const ProgramAst& p) {
  std::map<std::string, std::vector<StmtId>> call_sites_next;  // callee -> continuation after each call
  std::function<StmtId(const MethodDef&)> entry_of;
  auto first = [](const std::vector<Stmt>& b, const std::optional<StmtId>& k) -> std::optional<StmtId> {
    if (!b.empty()) return b.front().id;
    return k;
  };
  std::function<void(const MethodDef&, const std::vector<Stmt>&, std::optional<StmtId>)> link =
      [&](const MethodDef& m, const std::vector<Stmt>& body, std::optional<StmtId> k) {
        for (std::size_t i = 0; i < body.size(); ++i) {
          const Stmt& s = body[i];
          std::optional<StmtId> next = i + 1 < body.size() ? std::optional<StmtId>(body[i + 1].id) : k;
          auto& out = succ_[s.id];
          switch (s.kind) {
            case StmtKind::If:
              if (auto f = first(s.body, next)) out.push_back(*f);
              if (auto f = first(s.else_body, next)) out.push_back(*f);
              link(m, s.body, next);
              link(m, s.else_body, next);
              break;
            case StmtKind::While:
              if (!s.body.empty()) out.push_back(s.body.front().id);
              if (next) out.push_back(*next);
              link(m, s.body, std::nullopt);  // the edge back to the header is dropped
              break;
            case StmtKind::Return: out.push_back(StmtId::exit_of(m.name)); break;
            case StmtKind::Call: {
              const MethodDef* callee = p.find_method(s.callee);
              if (callee) out.push_back(callee->body.empty() ? StmtId::exit_of(callee->name) : callee->body.front().id);
              if (next) call_sites_next[s.callee].push_back(*next);
              break;
            }
            default:
              if (next) out.push_back(*next);
          }
        }
      };
  for (const auto& m : p.methods) {
    link(m, m.body, StmtId::exit_of(m.name));
    succ_[StmtId::exit_of(m.name)];
  }
  for (auto& [callee, nexts] : call_sites_next) {
    auto& out = succ_[StmtId::exit_of(callee)];
    out.insert(out.end(), nexts.begin(), nexts.end());
  }
}

bool ForwardReach::reaches(const StmtId& from, const StmtId& to) const {
  auto it = cache_.find(from);
  if (it == cache_.end()) {
    std::set<StmtId> seen;
    std::deque<StmtId> work;
    auto push_succ = [&](const StmtId& s) {
      auto f = succ_.find(s);
      if (f == succ_.end()) return;
      for (const auto& n : f->second)
        if (seen.insert(n).second) work.push_back(n);
    };
    push_succ(from);
    while (!work.empty()) {
      StmtId s = work.front();
      work.pop_front();
      push_succ(s);
    }
    it = cache_.emplace(from, std::move(seen)).first;
  }
  return it->second.count(to) > 0;
}

namespace {

// Collects, per complete synchronous run, the sequence of first occurrences of
// read/write statements.
class FirstOccurrence : public ExploreVisitor {
 public:
  explicit FirstOccurrence(std::size_t nstmts) : count_(nstmts, 0) {}

  void push(const Action& a) override {
    if (a.is_access() && count_[a.stmt]++ == 0) seq_.push_back(a.stmt);
  }
  void pop() override {}  // handled by pop_action

  bool complete(const Execution& e) override {
    truncated = truncated || e.truncated;
    sequences.insert(seq_);
    return true;
  }

  void retract(const Action& a) {
    if (a.is_access() && --count_[a.stmt] == 0) seq_.pop_back();
  }

  std::set<std::vector<int>> sequences;
  bool truncated = false;

 private:
  std::vector<int> count_;
  std::vector<int> seq_;
};

class FirstOccurrenceVisitor : public ExploreVisitor {
 public:
  explicit FirstOccurrenceVisitor(std::size_t n) : inner(n) {}
  void push(const Action& a) override {
    path_.push_back(a);
    inner.push(a);
  }
  void pop() override {
    inner.retract(path_.back());
    path_.pop_back();
  }
  bool complete(const Execution& e) override { return inner.complete(e); }
  FirstOccurrence inner;

 private:
  std::vector<Action> path_;
};

}  // namespace

StmtOrder::StmtOrder(const ProgramAst& p_sync, const ExplorationConfig& cfg) {
  Interpreter in(p_sync, cfg, RunMode::Synchronous);
  const auto& idx = in.index();
  FirstOccurrenceVisitor v(idx.stmts.size());
  std::vector<char> reached;
  in.explore(v, &reached);
  truncated_ = v.inner.truncated;
  for (std::size_t i = 0; i < reached.size(); ++i)
    if (reached[i]) reachable_.insert(idx.stmts[i]);
  for (const auto& seq : v.inner.sequences)
    for (std::size_t i = 0; i < seq.size(); ++i)
      for (std::size_t j = i + 1; j < seq.size(); ++j) prec_.insert({idx.stmts[seq[i]], idx.stmts[seq[j]]});
  for_each_stmt(p_sync, [&](const MethodDef&, const Stmt& s) {
    if (s.is_access() && reachable_.count(s.id)) accesses_.push_back(s.id);
  });
  std::sort(accesses_.begin(), accesses_.end());
  fwd_ = std::make_shared<ForwardReach>(p_sync);

  // Linear extension of prec_so; the smallest StmtId breaks ties and cycles.
  std::set<StmtId> left(accesses_.begin(), accesses_.end());
  int r = 0;
  while (!left.empty()) {
    const StmtId* pick = nullptr;
    for (const auto& s : left) {
      bool minimal = std::none_of(left.begin(), left.end(), [&](const StmtId& o) { return o != s && prec_so(o, s); });
      if (minimal) {
        pick = &s;
        break;
      }
    }
    StmtId chosen = pick ? *pick : *left.begin();
    rank_[chosen] = r++;
    left.erase(chosen);
  }
}

bool StmtOrder::prec(const StmtId& a, const StmtId& b) const { return prec_.count({a, b}) > 0; }

bool StmtOrder::prec_so(const StmtId& a, const StmtId& b) const {
  if (!prec(a, b)) return false;
  return !prec(b, a) || fwd_->reaches(a, b);
}

int StmtOrder::rank(const StmtId& s) const {
  auto it = rank_.find(s);
  return it == rank_.end() ? static_cast<int>(rank_.size()) : it->second;
}

bool stmt_prec(const ProgramAst& p_sync, const StmtId& a, const StmtId& b, const ExplorationConfig& cfg) {
  return StmtOrder(p_sync, cfg).prec(a, b);
}

bool stmt_prec_instrumented(const ProgramAst& p_sync, const StmtId& a, const StmtId& b,
                            const ExplorationConfig& cfg) {
  if (a == b) return false;
  ProgramAst q = p_sync;
  const std::string flag = "__prec_flag", seen = "__prec_seen";
  q.globals.push_back(flag);
  q.globals.push_back(seen);
  insert_before(q, a, {make::write(flag, Expr::integer(1))});
  std::vector<Stmt> check;
  check.push_back(make::read("__prec_f", flag));
  check.push_back(make::read("__prec_s", seen));
  check.push_back(make::if_then(
      Expr::binary(BinOp::Eq, Expr::local("__prec_s"), Expr::integer(0)),
      {make::write(seen, Expr::integer(1)),
       make::assert_that(Expr::binary(BinOp::Eq, Expr::local("__prec_f"), Expr::integer(0)))}));
  insert_before(q, b, std::move(check));
  finalize(q);
  struct Fail : ExploreVisitor {
    bool failed = false;
    bool complete(const Execution& e) override {
      failed = failed || e.assert_failed;
      return !failed;
    }
  } v;
  Interpreter(q, cfg, RunMode::Synchronous).explore(v);
  return v.failed;
}

bool race_prec_so(const StmtOrder& order, const DataRace& d1, const DataRace& d2) {
  if (d1.second_stmt == d2.second_stmt) return order.prec_so(d1.first_stmt, d2.first_stmt);
  return order.prec_so(d1.second_stmt, d2.second_stmt);
}

}  // namespace asyncsynth
