#include "asyncsynth/multithread.hpp"

#include <algorithm>

#include "compiled.hpp"
#include "race_visitor.hpp"

namespace asyncsynth {

using detail::Op;

namespace {

struct ThreadState {
  std::vector<std::int64_t> g;
  std::vector<std::vector<Frame>> threads;  // call stack per thread
  std::vector<char> completed;              // by task id
  TaskId next_task = 2;
  bool truncated = false;
  bool assert_failed = false;
};

struct Alt {
  int thread = 0;
  int alt = 0;
  std::int64_t value = 0;
};

}  // namespace

struct ThreadInterpreter::Impl {
  detail::Compiled prog;
  ExplorationConfig cfg;
  std::vector<char> spawns;
  std::vector<std::int64_t> initial_g;
  mutable std::vector<std::int64_t> scratch;

  const detail::CMethod& method(const Frame& f) const { return prog.methods[f.method]; }
  const detail::Instr& instr(const Frame& f) const { return method(f).code[f.pc]; }

  bool enabled(const ThreadState& c, const Frame& f) const {
    const auto& in = instr(f);
    if (in.op != Op::AwaitVar) return true;
    auto t = f.locals[in.slot];
    return t <= 0 || t >= static_cast<std::int64_t>(c.completed.size()) || c.completed[t];
  }

  void truthy_and_falsy(const Frame& f, int expr, bool& t, bool& z) const {
    detail::eval_all(method(f), expr, f.locals, f.task, cfg.domain, scratch);
    t = std::any_of(scratch.begin(), scratch.end(), [](auto v) { return v != 0; });
    z = std::any_of(scratch.begin(), scratch.end(), [](auto v) { return v == 0; });
  }

  void alternatives(int thread, const Frame& f, std::vector<Alt>& out) const {
    const auto& in = instr(f);
    bool t = false, z = false;
    switch (in.op) {
      case Op::Write:
      case Op::Assign:
        detail::eval_all(method(f), in.expr, f.locals, f.task, cfg.domain, scratch);
        for (auto v : scratch) out.push_back({thread, 0, v});
        return;
      case Op::Branch:
      case Op::Assert:
        truthy_and_falsy(f, in.expr, t, z);
        if (t) out.push_back({thread, 0, 0});
        if (z) out.push_back({thread, 1, 0});
        return;
      case Op::LoopTest:
        truthy_and_falsy(f, in.expr, t, z);
        if (f.loop_iters[in.loop] >= cfg.loop_bound) {
          out.push_back({thread, 1, t ? 1 : 0});
          return;
        }
        if (t) out.push_back({thread, 0, 0});
        if (z) out.push_back({thread, 1, 0});
        return;
      default: out.push_back({thread, 0, 0}); return;
    }
  }

  // Local steps of one thread first; otherwise every thread's next access.
  void choices(const ThreadState& c, std::vector<Alt>& out) const {
    out.clear();
    if (c.assert_failed) return;
    for (std::size_t i = 0; i < c.threads.size(); ++i) {
      const auto& st = c.threads[i];
      if (st.empty() || !enabled(c, st.back())) continue;
      auto op = instr(st.back()).op;
      if (op != Op::Read && op != Op::Write) {
        alternatives(static_cast<int>(i), st.back(), out);
        return;
      }
    }
    for (std::size_t i = 0; i < c.threads.size(); ++i) {
      const auto& st = c.threads[i];
      if (st.empty()) continue;
      auto op = instr(st.back()).op;
      if (op == Op::Read || op == Op::Write) alternatives(static_cast<int>(i), st.back(), out);
    }
  }

  Frame frame_for(int callee, TaskId t) const {
    Frame f;
    f.task = t;
    f.method = callee;
    f.locals.assign(prog.methods[callee].nlocals, 0);
    f.loop_iters.assign(prog.methods[callee].nloops, 0);
    return f;
  }

  bool apply(ThreadState& c, const Alt& ch, Action& a) const {
    auto& st = c.threads[ch.thread];
    Frame& f = st.back();
    const auto& in = instr(f);
    a = Action{};
    a.task = f.task;
    a.stmt = in.stmt;
    switch (in.op) {
      case Op::Read:
        a.kind = EventKind::Load;
        a.var = in.var;
        f.locals[in.slot] = c.g[in.var];
        ++f.pc;
        return true;
      case Op::Write:
        a.kind = EventKind::Store;
        a.var = in.var;
        c.g[in.var] = ch.value;
        ++f.pc;
        return true;
      case Op::Assign:
        f.locals[in.slot] = ch.value;
        ++f.pc;
        return false;
      case Op::Assert:
        if (ch.alt == 1) c.assert_failed = true;
        else ++f.pc;
        return false;
      case Op::Branch: f.pc = ch.alt == 0 ? f.pc + 1 : in.target; return false;
      case Op::LoopEnter:
        f.loop_iters[in.loop] = 0;
        ++f.pc;
        return false;
      case Op::LoopTest:
        if (ch.alt == 0) {
          ++f.loop_iters[in.loop];
          ++f.pc;
        } else {
          f.pc = in.target;
          if (ch.value) c.truncated = true;
        }
        return false;
      case Op::Jump: f.pc = in.target; return false;
      case Op::AwaitStar: ++f.pc; return false;
      case Op::AwaitVar:
        a.kind = EventKind::Await;
        a.target = static_cast<TaskId>(f.locals[in.slot]);
        ++f.pc;
        return true;
      case Op::Call: {
        TaskId t = c.next_task++;
        if (static_cast<int>(c.completed.size()) <= t) c.completed.resize(t + 1, 0);
        f.locals[in.slot] = t;
        ++f.pc;
        a.kind = EventKind::Call;
        a.target = t;
        Frame nf = frame_for(in.callee, t);
        if (prog.methods[in.callee].sigma) {
          c.threads.emplace_back();
          c.threads.back().push_back(std::move(nf));
        } else {
          st.push_back(std::move(nf));
        }
        return true;
      }
      case Op::Return:
        a.kind = EventKind::Return;
        c.completed[f.task] = 1;
        st.pop_back();
        return true;
    }
    return false;
  }

  ThreadState initial() const {
    ThreadState c;
    c.g = initial_g;
    c.completed.assign(2, 0);
    c.threads.emplace_back();
    c.threads.back().push_back(frame_for(prog.main, 1));
    return c;
  }
};

namespace {

struct ThreadDfs {
  const ThreadInterpreter::Impl& impl;
  ExploreVisitor& v;
  std::vector<Action> path;
  std::size_t states = 0;
  bool stop = false;

  void step(ThreadState& c, const Alt& ch) {
    Action a;
    if (impl.apply(c, ch, a)) {
      a.id = static_cast<int>(path.size());
      path.push_back(a);
      v.push(path.back());
    }
  }

  void rewind(std::size_t mark) {
    while (path.size() > mark) {
      path.pop_back();
      v.pop();
    }
  }

  void run(ThreadState c) {
    std::vector<Alt> ch;
    for (;;) {
      if (++states > impl.cfg.max_states)
        throw Error(ErrorCode::StateBudgetExceeded,
                    "state budget of " + std::to_string(impl.cfg.max_states) + " exhausted");
      impl.choices(c, ch);
      if (ch.empty()) {
        bool live = std::any_of(c.threads.begin(), c.threads.end(), [](const auto& s) { return !s.empty(); });
        if (live && !c.assert_failed) throw Error(ErrorCode::StuckState, "every live thread waits on a join");
        Execution e;
        e.index = impl.prog.index;
        e.actions = path;
        e.globals = c.g;
        e.truncated = c.truncated;
        e.assert_failed = c.assert_failed;
        if (!v.complete(e)) stop = true;
        return;
      }
      const std::size_t mark = path.size();
      for (std::size_t k = 0; k + 1 < ch.size(); ++k) {
        ThreadState copy = c;
        step(copy, ch[k]);
        run(std::move(copy));
        rewind(mark);
        if (stop) return;
      }
      step(c, ch.back());
    }
  }
};

}  // namespace

ThreadInterpreter::ThreadInterpreter(const ProgramAst& p, ExplorationConfig cfg) : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  impl_->prog = detail::compile(p);
  impl_->cfg = std::move(cfg);
  impl_->initial_g = detail::initial_globals(*impl_->prog.index, impl_->cfg);
  impl_->spawns.assign(impl_->prog.index->stmts.size(), 0);
  for (const auto& m : impl_->prog.methods)
    for (const auto& in : m.code)
      if (in.op == Op::Call && impl_->prog.methods[in.callee].sigma) impl_->spawns[in.stmt] = 1;
}

ThreadInterpreter::~ThreadInterpreter() = default;
ThreadInterpreter::ThreadInterpreter(ThreadInterpreter&&) noexcept = default;

const ProgramIndex& ThreadInterpreter::index() const { return *impl_->prog.index; }
std::shared_ptr<const ProgramIndex> ThreadInterpreter::shared_index() const { return impl_->prog.index; }
const std::vector<char>& ThreadInterpreter::spawns() const { return impl_->spawns; }

std::size_t ThreadInterpreter::explore(ExploreVisitor& v) const {
  ThreadDfs d{*impl_, v, {}, 0, false};
  d.run(impl_->initial());
  return d.states;
}

std::vector<Execution> ThreadInterpreter::explore_all() const {
  struct Collect : ExploreVisitor {
    std::vector<Execution> out;
    bool complete(const Execution& e) override {
      out.push_back(e);
      return true;
    }
  } c;
  explore(c);
  return std::move(c.out);
}

Trace mt_compute_orders(const ThreadInterpreter& in, const Execution& e) {
  return detail::orders_from(e, detail::HbTracker(in.spawns()));
}

RaceSearch mt_find_races(const ProgramAst& p, const ExplorationConfig& cfg, std::size_t limit) {
  ThreadInterpreter in(p, cfg);
  detail::RaceVisitor v(in.shared_index(), limit, detail::HbTracker(in.spawns()));
  v.out.states = in.explore(v);
  detail::sort_races(v.out.races);
  return std::move(v.out);
}

std::set<std::vector<std::int64_t>> mt_final_valuations(const ProgramAst& p, const ExplorationConfig& cfg,
                                                        bool* truncated) {
  struct Finals : ExploreVisitor {
    std::set<std::vector<std::int64_t>> out;
    bool truncated = false;
    bool complete(const Execution& e) override {
      out.insert(e.globals);
      truncated = truncated || e.truncated;
      return true;
    }
  } v;
  ThreadInterpreter(p, cfg).explore(v);
  if (truncated) *truncated = v.truncated;
  return std::move(v.out);
}

bool mt_sound(const MtRefactoring& r, const ExplorationConfig& cfg) {
  return mt_find_races(r.program(), cfg, 1).races.empty();
}

MtRefactoring mt_repair(const MtRefactoring& r, const RootCause& rc) { return repair_data_race(r, rc); }

MaxRelResult mt_maxrel(const MtRefactoring& r, const ExplorationConfig& cfg) {
  RepairOptions opt;
  opt.cfg = cfg;
  opt.semantics = Semantics::Threads;
  return RepairEngine(r.shared_space(), opt).maxrel(r);
}

}  // namespace asyncsynth
