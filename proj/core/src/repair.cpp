#include "asyncsynth/repair.hpp"

#include <algorithm>
#include <tuple>

#include "asyncsynth/frontend.hpp"
#include "asyncsynth/multithread.hpp"

namespace asyncsynth {

Asynchronization repair_data_race(const Asynchronization& a, const RootCause& rc) {
  const AsyncSpace& s = a.space();
  int k = s.call_index(rc.call);
  if (k < 0) throw Error(ErrorCode::InvalidRootCause, rc.call.str() + " is not an asynchronous call");
  int e = s.element_of(k, rc.anchor);
  if (e < 0)
    throw Error(ErrorCode::InvalidRootCause,
                rc.anchor.str() + " does not follow " + rc.call.str() + " in its method");
  auto bits = a.covered();
  for (int u : s.up_closure(e)) bits[u] = false;
  return a.with(std::move(bits));
}

// ---------------------------------------------------------------- instrumentation

namespace {

const char* const kLtd = "__ltd";  // last task delayed
const char* const kDda = "__dda";  // a descendant did await
const char* const kTsc = "__tsc";  // task of the root-cause call
const char* const kSc = "__sc";
const char* const kS = "__s";
const char* const kThda = "__thda";  // this task has done an await (local)
const char* const kT = "__t";
const char* const kT2 = "__t2";

ExprPtr L(const std::string& n) { return Expr::local(n); }
ExprPtr I(std::int64_t v) { return Expr::integer(v); }
ExprPtr eq(ExprPtr a, ExprPtr b) { return Expr::binary(BinOp::Eq, std::move(a), std::move(b)); }

class Rewriter {
 public:
  Rewriter(const StmtId& s1, const StmtId& s2, std::vector<StmtId>& codes) : s1_(s1), s2_(s2), codes_(codes) {}

  std::vector<Stmt> rewrite(const std::vector<Stmt>& body) {
    std::vector<Stmt> out;
    for (const Stmt& s : body) {
      if (s.id == s2_) before_s2(out);
      if (s.id == s1_) before_s1(out);
      switch (s.kind) {
        case StmtKind::AwaitVar: replace_await(s.local, out); continue;
        case StmtKind::AwaitStar: out.push_back(make::assign(kThda, I(1))); continue;
        case StmtKind::Call: {
          std::int64_t c = code(s.id);
          out.push_back(make::read(kT, kTsc));
          out.push_back(make::if_then(eq(L(kT), Expr::self()), {make::write(kS, I(c))}));
          out.push_back(s);
          out.push_back(make::read(kT, kLtd));
          out.push_back(make::if_then(eq(L(s.local), L(kT)), {make::write(kSc, I(c)), make::write(kTsc, Expr::self())}));
          continue;
        }
        case StmtKind::If:
        case StmtKind::While: {
          Stmt t = s;
          t.body = rewrite(s.body);
          t.else_body = rewrite(s.else_body);
          out.push_back(std::move(t));
          continue;
        }
        default: out.push_back(s);
      }
    }
    return out;
  }

 private:
  const StmtId& s1_;
  const StmtId& s2_;
  std::vector<StmtId>& codes_;

  std::int64_t code(const StmtId& id) {
    codes_.push_back(id);
    return static_cast<std::int64_t>(codes_.size());
  }

  void before_s1(std::vector<Stmt>& out) {
    out.push_back(make::read(kT, kLtd));
    out.push_back(make::if_then(
        eq(L(kT), I(0)),
        {make::if_then(Expr::choice(), {make::write(kLtd, Expr::self()), make::write(kDda, L(kThda)), make::ret()})}));
  }

  void before_s2(std::vector<Stmt>& out) {
    std::int64_t c = code(s2_);
    out.push_back(make::read(kT, kTsc));
    out.push_back(make::if_then(eq(L(kT), Expr::self()), {make::write(kS, I(c))}));
    out.push_back(make::read(kT, kLtd));
    out.push_back(make::read(kT2, kDda));
    out.push_back(make::assert_that(Expr::binary(BinOp::Add, eq(L(kT), I(0)), eq(L(kT2), I(0)))));
  }

  void replace_await(const std::string& r, std::vector<Stmt>& out) {
    out.push_back(make::read(kT, kLtd));
    std::vector<Stmt> delayed;
    delayed.push_back(make::read(kT2, kDda));
    delayed.push_back(make::if_then(eq(L(kT2), I(0)), {make::write(kDda, L(kThda))}));
    delayed.push_back(make::write(kLtd, Expr::self()));
    delayed.push_back(make::ret());
    out.push_back(make::if_then(eq(L(r), L(kT)), std::move(delayed), {make::assign(kThda, I(1))}));
  }
};

}  // namespace

Instrumented instrument_pair(const Asynchronization& a, const StmtId& s1, const StmtId& s2) {
  Instrumented in;
  in.s1 = s1;
  in.s2 = s2;
  in.program = a.program();
  for (const char* g : {kLtd, kDda, kTsc, kSc, kS}) in.program.globals.push_back(g);
  Rewriter rw(s1, s2, in.codes);
  for (auto& m : in.program.methods) m.body = rw.rewrite(m.body);
  finalize(in.program);
  return in;
}

InstrumentedRun run_instrumented(const Instrumented& in, const ExplorationConfig& cfg) {
  Interpreter it(in.program, cfg, RunMode::Synchronous);
  const int sc = it.index().global_index(kSc);
  const int s = it.index().global_index(kS);
  struct V : ExploreVisitor {
    bool truncated = false;
    std::optional<std::pair<std::int64_t, std::int64_t>> hit;
    int sc, s;
    bool complete(const Execution& e) override {
      truncated = truncated || e.truncated;
      if (!e.assert_failed) return true;
      hit = {e.globals[sc], e.globals[s]};
      return false;
    }
  } v;
  v.sc = sc;
  v.s = s;
  InstrumentedRun out;
  out.states = it.explore(v);
  out.truncated = v.truncated;
  if (v.hit) {
    auto [c, a] = *v.hit;
    auto valid = [&](std::int64_t x) { return x >= 1 && x <= static_cast<std::int64_t>(in.codes.size()); };
    if (!valid(c) || !valid(a))
      throw Error(ErrorCode::InvalidRootCause,
                  "race between " + in.s1.str() + " and " + in.s2.str() + " without a recorded root cause");
    out.cause = RootCause{in.codes[c - 1], in.codes[a - 1]};
  }
  return out;
}

// ---------------------------------------------------------------- MaxRel

RepairEngine::RepairEngine(std::shared_ptr<const AsyncSpace> space, RepairOptions opt)
    : space_(std::move(space)), opt_(std::move(opt)), order_(space_->base(), opt_.cfg) {
  const auto& acc = order_.accesses();
  auto global_of = [&](const StmtId& id) { return find_stmt(space_->base(), id); };
  for (const auto& s2 : acc)
    for (const auto& s1 : acc) {
      const Stmt* a = global_of(s1);
      const Stmt* b = global_of(s2);
      if (a->global != b->global) continue;
      if (a->kind != StmtKind::Write && b->kind != StmtKind::Write) continue;
      pairs_.emplace_back(s1, s2);
    }
  std::sort(pairs_.begin(), pairs_.end(), [&](const auto& x, const auto& y) {
    return std::make_tuple(order_.rank(x.second), order_.rank(x.first), x.second, x.first) <
           std::make_tuple(order_.rank(y.second), order_.rank(y.first), y.second, y.first);
  });
}

RcResult RepairEngine::by_instrumentation(const Asynchronization& a) {
  RcResult out;
  for (const auto& [s1, s2] : pairs_) {
    auto run = run_instrumented(instrument_pair(a, s1, s2), opt_.cfg);
    ++counters_.oracle_calls;
    counters_.states += run.states;
    out.truncated = out.truncated || run.truncated;
    if (run.cause) {
      out.race = MinRace{*run.cause, s1, s2};
      return out;
    }
  }
  return out;
}

RcResult RepairEngine::by_exploration(const Asynchronization& a) {
  RcResult out;
  auto rs = opt_.semantics == Semantics::Threads ? mt_find_races(a.program(), opt_.cfg)
                                                 : find_data_races(a.program(), opt_.cfg);
  ++counters_.oracle_calls;
  counters_.states += rs.states;
  out.truncated = rs.truncated;
  const DataRace* best = nullptr;
  auto key = [&](const DataRace& d) {
    return std::make_tuple(order_.rank(d.second_stmt), order_.rank(d.first_stmt), d.second_stmt, d.first_stmt);
  };
  for (const auto& d : rs.races)
    if (!best || key(d) < key(*best)) best = &d;
  if (best) out.race = MinRace{best->cause, best->first_stmt, best->second_stmt};
  return out;
}

RcResult RepairEngine::rc_min_drace(const Asynchronization& a) {
  if (opt_.oracle == RaceOracle::Instrumented && opt_.semantics == Semantics::Async) return by_instrumentation(a);
  return by_exploration(a);
}

MaxRelResult RepairEngine::maxrel(const Asynchronization& a) {
  MaxRelResult out{a, {}, false};
  for (;;) {
    auto rc = rc_min_drace(out.result);
    out.truncated = out.truncated || rc.truncated;
    if (!rc.race) return out;
    Asynchronization next = repair_data_race(out.result, rc.race->cause);
    if (next == out.result)
      throw Error(ErrorCode::InvalidRootCause, "repairing the race between " + rc.race->first.str() + " and " +
                                                   rc.race->second.str() + " moves no await");
    RepairStep step{*rc.race, {}};
    for (const auto& c : space_->calls()) {
      int k = static_cast<int>(&c - space_->calls().data());
      for (int e = c.first; e < c.first + c.count; ++e)
        if (next.covered()[e] != out.result.covered()[e]) {
          step.moved.push_back(k);
          break;
        }
    }
    out.steps.push_back(std::move(step));
    out.result = std::move(next);
  }
}

RcResult rc_min_drace(const Asynchronization& a, const RepairOptions& opt) {
  return RepairEngine(a.shared_space(), opt).rc_min_drace(a);
}

MaxRelResult maxrel(const Asynchronization& a, const RepairOptions& opt) {
  return RepairEngine(a.shared_space(), opt).maxrel(a);
}

}  // namespace asyncsynth
