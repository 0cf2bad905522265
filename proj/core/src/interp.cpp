#include <algorithm>

#include "asyncsynth/interp.hpp"
#include "compiled.hpp"

namespace asyncsynth {

using detail::Op;

void ExplorationConfig::validate() const {
  if (domain.empty()) throw std::invalid_argument("exploration domain must be nonempty");
  if (loop_bound < 1) throw std::invalid_argument("loop bound must be at least 1");
}

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Load: return "load";
    case EventKind::Store: return "store";
    case EventKind::Call: return "call";
    case EventKind::Await: return "await";
    case EventKind::Return: return "return";
    case EventKind::Continue: return "continue";
  }
  return "?";
}

namespace {

struct Choice {
  bool cont = false;  // Continue of pending[index]
  int alt = 0;
  std::int64_t value = 0;
  int index = 0;
};

}  // namespace

struct Interpreter::Impl {
  detail::Compiled prog;
  ExplorationConfig cfg;
  RunMode mode;
  std::vector<std::int64_t> initial_g;
  mutable std::vector<char>* reached = nullptr;
  mutable std::vector<std::int64_t> scratch;

  const detail::CMethod& method(const Frame& f) const { return prog.methods[f.method]; }
  const detail::Instr& instr(const Frame& f) const { return method(f).code[f.pc]; }

  bool star_active(const Frame& f) const { return mode == RunMode::Async && method(f).lambda; }

  bool silent(const Frame& f) const {
    switch (instr(f).op) {
      case Op::Branch:
      case Op::Assign:
      case Op::Assert:
      case Op::LoopEnter:
      case Op::LoopTest:
      case Op::Jump: return true;
      case Op::AwaitVar: return mode == RunMode::Synchronous;
      case Op::AwaitStar: return !star_active(f);
      default: return false;
    }
  }

  void values(const Frame& f, int expr) const {
    detail::eval_all(method(f), expr, f.locals, f.task, cfg.domain, scratch);
  }

  void top_alternatives(const Frame& f, std::vector<Choice>& out) const {
    const auto& in = instr(f);
    switch (in.op) {
      case Op::Write:
      case Op::Assign:
        values(f, in.expr);
        for (auto v : scratch) out.push_back({false, 0, v, 0});
        return;
      case Op::Branch:
      case Op::Assert: {
        values(f, in.expr);
        bool t = std::any_of(scratch.begin(), scratch.end(), [](auto v) { return v != 0; });
        bool z = std::any_of(scratch.begin(), scratch.end(), [](auto v) { return v == 0; });
        if (t) out.push_back({false, 0, 0, 0});
        if (z) out.push_back({false, 1, 0, 0});
        return;
      }
      case Op::LoopTest: {
        values(f, in.expr);
        bool t = std::any_of(scratch.begin(), scratch.end(), [](auto v) { return v != 0; });
        bool z = std::any_of(scratch.begin(), scratch.end(), [](auto v) { return v == 0; });
        if (f.loop_iters[in.loop] >= cfg.loop_bound) {
          out.push_back({false, 1, t ? 1 : 0, 0});
          return;
        }
        if (t) out.push_back({false, 0, 0, 0});
        if (z) out.push_back({false, 1, 0, 0});
        return;
      }
      case Op::AwaitStar:
        out.push_back({false, 0, 0, 0});
        if (star_active(f)) out.push_back({false, 1, 0, 0});
        return;
      default: out.push_back({false, 0, 0, 0}); return;
    }
  }

  void choices(const Configuration& c, std::vector<Choice>& out) const {
    out.clear();
    if (c.assert_failed) return;
    if (!c.stack.empty()) {
      const Frame& f = c.stack.back();
      top_alternatives(f, out);
      if (silent(f)) return;
    }
    if (c.atomic) return;
    for (std::size_t i = 0; i < c.pending.size(); ++i) {
      const Frame& p = c.pending[i];
      if (p.waits == kWaitStar || (c.stack.empty() && c.completed[p.waits]))
        out.push_back({true, 0, 0, static_cast<int>(i)});
    }
  }

  static void suspend(Configuration& c, TaskId waits) {
    Frame f = std::move(c.stack.back());
    c.stack.pop_back();
    f.waits = waits;
    auto pos = std::lower_bound(c.pending.begin(), c.pending.end(), f.task,
                                [](const Frame& a, TaskId t) { return a.task < t; });
    c.pending.insert(pos, std::move(f));
  }

  // Applies one choice in place; returns true and fills `a` when an action occurs.
  bool apply(Configuration& c, const Choice& ch, Action& a) const {
    if (ch.cont) {
      Frame f = std::move(c.pending[ch.index]);
      c.pending.erase(c.pending.begin() + ch.index);
      if (f.waits == kWaitStar) c.atomic = f.task;
      f.waits = 0;
      a = Action{};
      a.task = f.task;
      a.kind = EventKind::Continue;
      c.stack.push_back(std::move(f));
      return true;
    }
    Frame& f = c.stack.back();
    const auto& in = instr(f);
    if (reached && in.stmt >= 0) (*reached)[in.stmt] = 1;
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
      case Op::Branch:
        f.pc = ch.alt == 0 ? f.pc + 1 : in.target;
        return false;
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
      case Op::Jump:
        f.pc = in.target;
        return false;
      case Op::Call: {
        TaskId t = c.next_task++;
        if (static_cast<int>(c.completed.size()) <= t) {
          c.completed.resize(t + 1, 0);
          c.caller.resize(t + 1, 0);
        }
        c.caller[t] = f.task;
        f.locals[in.slot] = t;
        ++f.pc;
        a.kind = EventKind::Call;
        a.target = t;
        const auto& callee = prog.methods[in.callee];
        Frame nf;
        nf.task = t;
        nf.method = in.callee;
        nf.locals.assign(callee.nlocals, 0);
        nf.loop_iters.assign(callee.nloops, 0);
        c.stack.push_back(std::move(nf));
        return true;
      }
      case Op::Return:
        a.kind = EventKind::Return;
        c.completed[f.task] = 1;
        if (c.atomic == f.task) c.atomic = 0;
        c.stack.pop_back();
        return true;
      case Op::AwaitVar: {
        ++f.pc;
        if (mode == RunMode::Synchronous) return false;
        TaskId t = static_cast<TaskId>(f.locals[in.slot]);
        a.kind = EventKind::Await;
        a.target = t;
        if (t > 0 && t < static_cast<TaskId>(c.completed.size()) && !c.completed[t]) {
          if (c.atomic == f.task) c.atomic = 0;
          suspend(c, t);
        }
        return true;
      }
      case Op::AwaitStar:
        ++f.pc;
        if (!star_active(f)) return false;
        a.kind = EventKind::Await;
        a.target = 0;
        if (ch.alt == 1) {
          if (c.atomic == f.task) c.atomic = 0;
          suspend(c, kWaitStar);
        }
        return true;
    }
    return false;
  }

  Configuration initial() const {
    Configuration c;
    c.g = initial_g;
    c.completed.assign(2, 0);
    c.caller.assign(2, 0);
    Frame f;
    f.task = 1;
    f.method = prog.main;
    f.locals.assign(prog.methods[prog.main].nlocals, 0);
    f.loop_iters.assign(prog.methods[prog.main].nloops, 0);
    c.stack.push_back(std::move(f));
    c.next_task = 2;
    return c;
  }
};

namespace {

struct Dfs {
  const Interpreter::Impl& impl;
  ExploreVisitor& v;
  std::vector<Action> path;
  std::size_t states = 0;
  bool stop = false;

  void step(Configuration& c, const Choice& ch) {
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

  void run(Configuration c) {
    std::vector<Choice> ch;
    for (;;) {
      if (++states > impl.cfg.max_states)
        throw Error(ErrorCode::StateBudgetExceeded,
                    "state budget of " + std::to_string(impl.cfg.max_states) + " exhausted");
      impl.choices(c, ch);
      if (ch.empty()) {
        if (!c.assert_failed && (!c.stack.empty() || !c.pending.empty()))
          throw Error(ErrorCode::StuckState, "no transition enabled with tasks outstanding");
        Execution e;
        e.index = impl.prog.index;
        e.actions = path;
        e.globals = c.g;
        e.truncated = c.truncated;
        e.assert_failed = c.assert_failed;
        if (!v.complete(e)) stop = true;
        return;
      }
      if (ch.size() > 1) {
        const std::size_t mark = path.size();
        for (std::size_t k = 0; k + 1 < ch.size(); ++k) {
          Configuration copy = c;
          step(copy, ch[k]);
          run(std::move(copy));
          rewind(mark);
          if (stop) return;
        }
      }
      step(c, ch.back());
    }
  }
};

}  // namespace

Interpreter::Interpreter(const ProgramAst& p, ExplorationConfig cfg, RunMode mode) : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  impl_->prog = detail::compile(p);
  impl_->cfg = std::move(cfg);
  impl_->mode = mode;
  impl_->initial_g = detail::initial_globals(*impl_->prog.index, impl_->cfg);
}

Interpreter::~Interpreter() = default;
Interpreter::Interpreter(Interpreter&&) noexcept = default;

const ProgramIndex& Interpreter::index() const { return *impl_->prog.index; }
std::shared_ptr<const ProgramIndex> Interpreter::shared_index() const { return impl_->prog.index; }

Configuration Interpreter::initial_config() const { return impl_->initial(); }

std::vector<Step> Interpreter::enabled_steps(const Configuration& c) const {
  std::vector<Choice> ch;
  impl_->choices(c, ch);
  if (ch.empty() && !c.assert_failed && !c.stack.empty())
    throw Error(ErrorCode::StuckState, "no transition enabled with a nonempty stack");
  std::vector<Step> out;
  for (const auto& x : ch) {
    Step s{std::nullopt, c};
    Action a;
    if (impl_->apply(s.next, x, a)) s.action = a;
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t Interpreter::explore(ExploreVisitor& v, std::vector<char>* reached) const {
  if (reached) reached->assign(impl_->prog.index->stmts.size(), 0);
  impl_->reached = reached;
  Dfs d{*impl_, v, {}, 0, false};
  try {
    d.run(impl_->initial());
  } catch (...) {
    impl_->reached = nullptr;
    throw;
  }
  impl_->reached = nullptr;
  return d.states;
}

std::vector<Execution> Interpreter::explore_all() const {
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

SyncResult run_synchronous(const ProgramAst& p, const ExplorationConfig& cfg) {
  struct Finals : ExploreVisitor {
    SyncResult r;
    bool complete(const Execution& e) override {
      r.finals.insert(e.globals);
      r.truncated = r.truncated || e.truncated;
      return true;
    }
  } v;
  Interpreter in(p, cfg, RunMode::Synchronous);
  std::vector<char> reached;
  in.explore(v, &reached);
  for (std::size_t i = 0; i < reached.size(); ++i)
    if (reached[i]) v.r.reached.insert(in.index().stmts[i]);
  return std::move(v.r);
}

std::set<std::vector<std::int64_t>> final_valuations(const ProgramAst& p, const ExplorationConfig& cfg,
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
  Interpreter(p, cfg, RunMode::Async).explore(v);
  if (truncated) *truncated = v.truncated;
  return std::move(v.out);
}

}  // namespace asyncsynth
