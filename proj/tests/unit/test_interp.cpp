#include <doctest.h>

#include <map>

#include <asyncsynth/frontend.hpp>
#include <asyncsynth/interp.hpp>
#include <asyncsynth/space.hpp>

#include "oracles.hpp"
#include "random_programs.hpp"

using namespace asyncsynth;
using namespace asyncsynth::testing;

namespace {

using Valuations = std::set<std::vector<std::int64_t>>;

ProgramAst corpus(const std::string& name) { return parse_program(read_text(corpus_path(name))); }

// Plain recursion over enabled_steps, collecting the final valuations and the
// action sequences of maximal paths.
void naive_dfs(const Interpreter& in, const Configuration& c, std::vector<EventKind>& path, Valuations& finals,
               std::set<std::vector<EventKind>>& traces) {
  auto steps = in.enabled_steps(c);
  if (steps.empty()) {
    finals.insert(c.g);
    traces.insert(path);
    return;
  }
  for (const auto& s : steps) {
    if (s.action) path.push_back(s.action->kind);
    naive_dfs(in, s.next, path, finals, traces);
    if (s.action) path.pop_back();
  }
}

ProgramAst program(std::string_view text) { return parse_program(text); }

}  // namespace

TEST_CASE("a single write has one execution") {
  Interpreter in(corpus("minimal"), {});
  auto all = in.explore_all();
  REQUIRE(all.size() == 1);
  CHECK(all[0].globals == std::vector<std::int64_t>{1});
  REQUIRE(all[0].actions.size() == 2);
  CHECK(all[0].actions[0].kind == EventKind::Store);
  CHECK(all[0].actions[1].kind == EventKind::Return);
  CHECK_FALSE(all[0].truncated);
}

TEST_CASE("a suspended callee can write between the caller's read and write") {
  // Continue: 2 then 3. Suspend: the callee writes 2 before the read (3),
  // between read and write (1), or after the write (2).
  ProgramAst p = corpus("read_then_increment");
  CHECK(final_valuations(p, {}) == Valuations{{1}, {2}, {3}});
  CHECK(run_synchronous(p, {}).finals == Valuations{{3}});
}

TEST_CASE("awaiting immediately after each call behaves like the synchronous program") {
  for (const char* name : {"rdfile_sync", "read_then_increment", "two_threads", "guarded_write", "io_readtoend"}) {
    CAPTURE(name);
    ProgramAst p = corpus(name);
    auto strong = strong_async(p);
    CHECK(final_valuations(strong.program(), {}) == run_synchronous(p, {}).finals);
  }
}

TEST_CASE("explore agrees with plain recursion over enabled steps") {
  for (const char* name : {"read_then_increment", "rdfile_async", "start_join", "branch_repair", "loop_order"}) {
    CAPTURE(name);
    Interpreter in(corpus(name), {});
    Valuations finals;
    std::set<std::vector<EventKind>> traces;
    std::vector<EventKind> path;
    naive_dfs(in, in.initial_config(), path, finals, traces);

    Valuations explored;
    std::set<std::vector<EventKind>> explored_traces;
    for (const auto& e : in.explore_all()) {
      explored.insert(e.globals);
      std::vector<EventKind> kinds;
      for (const auto& a : e.actions) kinds.push_back(a.kind);
      explored_traces.insert(kinds);
    }
    CHECK(finals == explored);
    CHECK(traces == explored_traces);
  }
}

TEST_CASE("a task blocked on an unfinished callee resumes only after it returns") {
  for (std::uint64_t seed = 0, i = 0; i < 40; ++i) {
    std::uint64_t used = 0;
    ProgramAst p = random_program(seed, {}, &used);
    seed = used + 1;
    auto w = weakest_async(p);
    Interpreter in(w.program(), {});
    for (const auto& e : in.explore_all()) {
      std::set<TaskId> returned;
      std::map<TaskId, TaskId> blocked_on;
      for (std::size_t k = 0; k < e.actions.size(); ++k) {
        const Action& a = e.actions[k];
        CHECK(a.id == static_cast<int>(k));
        auto b = blocked_on.find(a.task);
        if (b != blocked_on.end()) {
          CHECK(a.kind == EventKind::Continue);
          CHECK(returned.count(b->second));
          blocked_on.erase(b);
        }
        if (a.kind == EventKind::Return) returned.insert(a.task);
        if (a.kind == EventKind::Await && a.target > 0 && !returned.count(a.target)) blocked_on[a.task] = a.target;
      }
    }
  }
}

TEST_CASE("synchronous mode ignores awaits") {
  ProgramAst p = corpus("rdfile_async");
  Interpreter in(p, {}, RunMode::Synchronous);
  auto all = in.explore_all();
  // content := * over {0, 1}.
  CHECK(all.size() == 2);
  for (const auto& e : all)
    for (const auto& a : e.actions) CHECK(a.kind != EventKind::Await);
}

TEST_CASE("star values range over the configured domain") {
  ProgramAst p = program("globals x; method Main { x := *; }");
  ExplorationConfig cfg;
  cfg.domain = {3, 5, 7};
  CHECK(final_valuations(p, cfg) == Valuations{{3}, {5}, {7}});
}

TEST_CASE("loops are cut at the loop bound and the cut is reported") {
  ProgramAst p = program("globals x; method Main { while (*) { r := x; x := r + 1; } }");
  ExplorationConfig cfg;
  cfg.loop_bound = 3;
  bool truncated = false;
  CHECK(final_valuations(p, cfg, &truncated) == Valuations{{0}, {1}, {2}, {3}});
  CHECK(truncated);
  cfg.loop_bound = 1;
  CHECK(final_valuations(p, cfg) == Valuations{{0}, {1}});
}

TEST_CASE("initial global values") {
  ProgramAst p = program("globals x, y; method Main { r := x; y := r + 1; }");
  ExplorationConfig cfg;
  cfg.initial = {{"x", 5}};
  CHECK(final_valuations(p, cfg) == Valuations{{5, 6}});
  cfg.initial = {{"z", 1}};
  CHECK_THROWS_AS(final_valuations(p, cfg), Error);
}

TEST_CASE("a failing assertion ends the execution") {
  ProgramAst p = program("globals x; method Main { r := x; assert (r == 1); x := 2; }");
  Interpreter in(p, {});
  auto all = in.explore_all();
  REQUIRE(all.size() == 1);
  CHECK(all[0].assert_failed);
  CHECK(all[0].globals == std::vector<std::int64_t>{0});
}

TEST_CASE("the state budget is enforced") {
  ExplorationConfig cfg;
  cfg.max_states = 10;
  try {
    final_valuations(corpus("two_threads"), cfg);
    FAIL("budget not hit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StateBudgetExceeded);
  }
}

TEST_CASE("invalid configurations are rejected") {
  ExplorationConfig cfg;
  cfg.domain.clear();
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.loop_bound = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("await-star only branches in asyncified methods") {
  // Main is not asyncified, so its own `await *` never suspends.
  ProgramAst p = program("globals x; method Main { await *; x := 1; }");
  CHECK(Interpreter(p, {}).explore_all().size() == 1);
}
