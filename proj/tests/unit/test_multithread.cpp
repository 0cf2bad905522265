#include <doctest.h>

#include <asyncsynth/enumerate.hpp>
#include <asyncsynth/frontend.hpp>
#include <asyncsynth/multithread.hpp>

#include "oracles.hpp"
#include "random_programs.hpp"

using namespace asyncsynth;
using namespace asyncsynth::testing;

namespace {

using Vec = std::vector<int>;

ProgramAst corpus(const std::string& name) { return parse_program(read_text(corpus_path(name))); }
StmtId id(const char* s) { return StmtId::parse(s); }

std::vector<ProgramAst> small_programs(std::uint64_t seed, int n) {
  GenOptions opt;
  opt.max_calls = 3;
  opt.cap_semantics = Semantics::Threads;
  std::vector<ProgramAst> out;
  for (int i = 0; i < n; ++i) {
    std::uint64_t used = 0;
    out.push_back(random_program(seed, opt, &used));
    seed = used + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("start/join example: the join placement races only with threads") {
  ProgramAst p = corpus("start_join");
  CHECK(find_data_races(p, {}).races.empty());
  RaceSearch r = mt_find_races(p, {});
  REQUIRE(r.races.size() == 1);
  const DataRace& d = r.races[0];
  CHECK(d.var == "x");
  CHECK(d.first_stmt == id("F:1"));
  CHECK(d.second_stmt == id("Main:1"));
  CHECK(d.cause == RootCause{id("Main:0"), id("Main:1")});
}

TEST_CASE("start/join example: repair moves the join before the write") {
  auto a = asynchronization_of(corpus("start_join"));
  CHECK(distance_vector(a) == Vec{1, 1});
  CHECK_FALSE(mt_sound(a));
  MtRefactoring fixed = mt_repair(a, {id("Main:0"), id("Main:1")});
  CHECK(distance_vector(fixed) == Vec{0, 1});
  CHECK(mt_sound(fixed));
  MaxRelResult m = mt_maxrel(a);
  CHECK(m.result == fixed);
  REQUIRE(m.steps.size() == 1);
}

TEST_CASE("two threads writing what Main reads: three races") {
  ProgramAst p = corpus("two_threads");
  CHECK(find_data_races(p, {}).races.empty());
  RaceSearch r = mt_find_races(p, {});
  REQUIRE(r.races.size() == 3);
  std::set<std::pair<StmtId, StmtId>> pairs;
  for (const auto& d : r.races) pairs.insert({d.first_stmt, d.second_stmt});
  CHECK(pairs == std::set<std::pair<StmtId, StmtId>>{
                     {id("F1:1"), id("Main:2")}, {id("F2:1"), id("Main:3")}, {id("F1:1"), id("Main:4")}});
}

TEST_CASE("thread maxima match frozen brute-force values") {
  // Values from brute-force filtering of every placement under thread semantics.
  const std::vector<std::pair<const char*, Vec>> frozen = {
      {"start_join_sync", {0, 1}}, {"two_threads", {1, 1, 1, 1}}, {"guarded_write", {0, 3, 2}},
      {"increment_racy", {0, 2}},  {"increment_sound", {0, 2}},   {"sleep_right", {0, 0, 2}},
  };
  for (const auto& [name, v] : frozen) {
    CAPTURE(name);
    auto w = weakest_async(erase_await_vars(corpus(name)));
    CHECK(distance_vector(mt_maxrel(w).result) == v);
  }
}

TEST_CASE("thread soundness is at least as strict as async soundness") {
  for (const char* name : {"guarded_write", "two_threads", "start_join_sync", "sleep_right"}) {
    CAPTURE(name);
    ProgramAst p = erase_await_vars(corpus(name));
    auto mt = brute_force(p, {}, Semantics::Threads).sound_set();
    auto as = brute_force(p, {}).sound_set();
    for (const auto& b : mt) CHECK(as.count(b));
  }
}

TEST_CASE("thread-sound refactorings are downward closed with a unique maximum") {
  for (const auto& p : small_programs(500, 30)) {
    auto sp = std::make_shared<const AsyncSpace>(p);
    BruteForce bf = brute_force(p, {}, Semantics::Threads);
    auto sound = bf.sound_set();
    for (const auto& a : bf.all) {
      if (!sound.count(a.covered())) continue;
      for (const auto& b : bf.all)
        if (subset(b.covered(), a.covered())) CHECK(sound.count(b.covered()));
    }
    auto w = weakest_async(sp);
    auto best = bf.max_sound_below(w.covered());
    REQUIRE(best);
    CHECK(*best == mt_maxrel(w).result.covered());
  }
}

TEST_CASE("thread enumeration yields exactly the thread-sound refactorings") {
  std::vector<ProgramAst> programs = small_programs(700, 20);
  for (const char* name : {"two_threads", "guarded_write", "start_join_sync"})
    programs.push_back(erase_await_vars(corpus(name)));
  for (const auto& p : programs) {
    EnumOptions opt;
    opt.repair.semantics = Semantics::Threads;
    EnumerationRun r = asy_syn(p, opt);
    std::set<Bits> got;
    for (const auto& o : r.outputs) got.insert(o.async.covered());
    CHECK_FALSE(r.duplicates);
    CHECK(got.size() == r.outputs.size());
    CHECK(got == brute_force(p, {}, Semantics::Threads).sound_set());
  }
}

TEST_CASE("joins happen after the joined thread returns and await-star never blocks") {
  for (const auto& p : small_programs(900, 20)) {
    ThreadInterpreter in(weakest_async(p).program(), {});
    for (const auto& e : in.explore_all()) {
      std::set<TaskId> returned;
      for (const auto& a : e.actions) {
        if (a.kind == EventKind::Return) returned.insert(a.task);
        if (a.kind == EventKind::Await) {
          CHECK(a.target != 0);
          CHECK(returned.count(a.target));
        }
        CHECK(a.kind != EventKind::Continue);
      }
    }
  }
}

TEST_CASE("thread orders: start edges only, no edge back from the started thread") {
  ProgramAst p = corpus("start_join");
  ThreadInterpreter in(p, {});
  for (const auto& e : in.explore_all()) {
    Trace t = mt_compute_orders(in, e);
    int call = -1, write = -1;
    for (std::size_t i = 0; i < e.actions.size(); ++i) {
      const Action& a = e.actions[i];
      if (a.kind == EventKind::Call && e.index->stmts[a.stmt] == id("F:0")) call = static_cast<int>(i);
      if (a.kind == EventKind::Store && e.index->stmts[a.stmt] == id("F:1")) write = static_cast<int>(i);
    }
    REQUIRE(call >= 0);
    REQUIRE(write >= 0);
    CHECK(t.hb.test(call, write));
    // Main's write is unordered with F's write in every interleaving.
    for (std::size_t i = 0; i < e.actions.size(); ++i) {
      const Action& a = e.actions[i];
      if (a.kind == EventKind::Store && e.index->stmts[a.stmt] == id("Main:1")) {
        CHECK_FALSE(t.hb.test(static_cast<int>(i), write));
        CHECK_FALSE(t.hb.test(write, static_cast<int>(i)));
      }
    }
  }
}

TEST_CASE("final valuations: the racy join admits both orders of the writes") {
  auto finals = mt_final_valuations(corpus("start_join"), {});
  CHECK(finals == std::set<std::vector<std::int64_t>>{{1}, {2}});
  auto fixed = mt_final_valuations(mt_repair(asynchronization_of(corpus("start_join")), {id("Main:0"), id("Main:1")}).program(), {});
  CHECK(fixed == std::set<std::vector<std::int64_t>>{{2}});
}
