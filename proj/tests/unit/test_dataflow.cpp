#include <doctest.h>

#include <asyncsynth/dataflow.hpp>
#include <asyncsynth/frontend.hpp>
#include <asyncsynth/multithread.hpp>

#include "oracles.hpp"
#include "random_programs.hpp"

using namespace asyncsynth;
using namespace asyncsynth::testing;

namespace {

using Vec = std::vector<int>;
using Names = std::set<std::string>;

ProgramAst corpus(const std::string& name) { return parse_program(read_text(corpus_path(name))); }
StmtId id(const char* s) { return StmtId::parse(s); }

bool leq_summary(const AccessSummary& a, const AccessSummary& b) {
  return std::includes(b.reads.begin(), b.reads.end(), a.reads.begin(), a.reads.end()) &&
         std::includes(b.writes.begin(), b.writes.end(), a.writes.begin(), a.writes.end());
}

std::vector<ProgramAst> random_corpus(std::uint64_t seed, int n) {
  std::vector<ProgramAst> out;
  for (int i = 0; i < n; ++i) {
    std::uint64_t used = 0;
    out.push_back(random_program(seed, {}, &used));
    seed = used + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("abstraction turns conditions into stars and loops into one-armed conditionals") {
  ProgramAst p = parse_program(
      "globals x; method Main { r := x; if (r == 1) { x := 1; } else { x := 2; } while (r < 3) { x := 3; } }");
  ProgramAst a = abstract_program(p);
  const Stmt* cond = find_stmt(a, id("Main:1"));
  const Stmt* loop = find_stmt(a, id("Main:2"));
  REQUIRE(cond);
  REQUIRE(loop);
  CHECK(cond->kind == StmtKind::If);
  CHECK(cond->expr->kind == ExprKind::Star);
  CHECK_FALSE(cond->from_loop);
  CHECK(loop->kind == StmtKind::If);
  CHECK(loop->expr->kind == ExprKind::Star);
  CHECK(loop->from_loop);
  CHECK(find_stmt(a, id("Main:2.0.0")));
  CHECK(structurally_equal(abstract_program(a), a));
}

TEST_CASE("read/write summaries of the read-after-call example") {
  RwSummaries rw = rw_var(corpus("read_after_call_sync"));
  CHECK(rw.method.at("m1").reads == Names{"x", "input"});
  CHECK(rw.method.at("m1").writes == Names{"retVal", "x"});
  CHECK(rw.method.at("Main").reads == Names{"x", "input"});
  CHECK(rw.method.at("Main").writes == Names{"retVal", "x"});
  CHECK(rw.stmt.at(id("Main:0")) == rw.method.at("m1"));
  CHECK(rw.stmt.at(id("Main:1")).reads == Names{"x"});
}

TEST_CASE("an empty base method has empty summaries") {
  RwSummaries rw = rw_var(corpus("sleep_left"));
  CHECK(rw.method.at("IO") == AccessSummary{});
}

TEST_CASE("concurrent summaries: an IO method after await-star is concurrent as a whole") {
  ProgramAst p = abstract_program(corpus("read_after_call_sync"));
  auto w = weakest_async(p);
  RwSummaries rw = rw_var(w.program());
  auto crw = crw_var(w.program(), rw);
  CHECK(crw.at("m1").reads == Names{"x", "input"});
  CHECK(crw.at("m1").writes == Names{"retVal", "x"});
}

TEST_CASE("concurrent summaries: no awaits and no asynchronous callees means nothing") {
  ProgramAst p = corpus("minimal");
  RwSummaries rw = rw_var(p);
  CHECK(crw_var(p, rw).at("Main") == AccessSummary{});
}

TEST_CASE("concurrent summaries: awaits at the end pass on only callee summaries") {
  // Main awaits last, so only what RdFile leaves running escapes.
  auto a = asynchronization_of(abstract_program(corpus("rdfile_async")));
  RwSummaries rw = rw_var(a.program());
  auto crw = crw_var(a.program(), rw);
  CHECK(crw.at("ReadToEnd").reads == Names{"content", "x"});
  CHECK(crw.at("RdFile") == crw.at("ReadToEnd"));
  CHECK(crw.at("Main") == crw.at("ReadToEnd"));
}

TEST_CASE("conflict check") {
  AccessSummary r{{"x"}, {}}, w{{}, {"x"}}, other{{"y"}, {"y"}};
  CHECK(conflicts(r, w));
  CHECK(conflicts(w, r));
  CHECK_FALSE(conflicts(r, r));
  CHECK(conflicts(w, w));
  CHECK_FALSE(conflicts(w, other));
}

TEST_CASE("summary repair also fixes a race that never happens synchronously") {
  auto a = asynchronization_of(corpus("guarded_write"));
  CHECK(distance_vector(a) == Vec{1, 1, 2});
  Vec precise = distance_vector(maxrel(a).result);
  auto sharp = to_concrete(maxrel_sharp(to_abstract(a)).result, a.shared_space());
  CHECK(precise == Vec{0, 1, 2});
  CHECK(distance_vector(sharp) == Vec{0, 1, 1});
  CHECK(find_data_races(sharp.program(), {}).races.empty());
  CHECK(leq(sharp, maxrel(a).result));
}

TEST_CASE("on the file-length example summaries are exact") {
  auto w = weakest_async(abstract_program(corpus("rdfile_sync")));
  CHECK(distance_vector(maxrel_sharp(w).result) == Vec{1, 1});
}

TEST_CASE("a conflict-free placement is a fixpoint") {
  auto a = asynchronization_of(abstract_program(corpus("rdfile_async")));
  MaxRelResult r = maxrel_sharp(a);
  CHECK(r.result == a);
  CHECK(r.steps.empty());
}

TEST_CASE("summary operations are counted") {
  std::size_t ops = 0;
  maxrel_sharp(weakest_async(abstract_program(corpus("two_threads"))), &ops);
  CHECK(ops > 0);
}

TEST_CASE("abstract and concrete spaces line up") {
  for (const auto& p : random_corpus(3, 40)) {
    auto conc = std::make_shared<const AsyncSpace>(p);
    for (const auto& a : all_downsets(conc)) {
      auto abs = to_abstract(a);
      CHECK(abs.covered() == a.covered());
      CHECK(to_concrete(abs, conc) == a);
    }
  }
}

TEST_CASE("dataflow maxima are sound, below the precise maxima, and maximal on the abstraction") {
  std::vector<ProgramAst> programs = random_corpus(21, 40);
  for (const char* name : {"rdfile_sync", "two_threads", "guarded_write", "branch_increment", "sleep_right",
                           "start_join_sync", "wf_nested_loop_ok", "loop_order"})
    programs.push_back(erase_await_vars(corpus(name)));
  for (const auto& p : programs) {
    auto w = weakest_async(p);
    auto sharp = to_concrete(maxrel_sharp(to_abstract(w)).result, w.shared_space());
    CHECK(find_data_races(sharp.program(), {}).races.empty());
    CHECK(leq(sharp, maxrel(w).result));

    ProgramAst abs = abstract_program(p);
    auto aw = weakest_async(abs);
    auto best = brute_force(abs, {}).max_sound_below(aw.covered());
    REQUIRE(best);
    CHECK(*best == maxrel_sharp(aw).result.covered());
  }
}

TEST_CASE("summaries only grow when an access is added") {
  for (std::uint64_t seed = 40; seed < 80; ++seed) {
    std::string text = random_program_text(seed);
    ProgramAst p;
    try {
      p = parse_program(text);
    } catch (const Error&) {
      continue;
    }
    // Append a write of the first global to Main.
    auto pos = text.find("method Main {\n");
    REQUIRE(pos != std::string::npos);
    std::string grown = text;
    grown.insert(pos + 14, "  x := 7;\n");
    ProgramAst q = parse_program(grown);
    RwSummaries a = rw_var(p), b = rw_var(q);
    for (const auto& [m, s] : a.method) CHECK(leq_summary(s, b.method.at(m)));
    CHECK(b.method.at("Main").writes.count("x"));

    auto wa = weakest_async(abstract_program(p));
    auto wb = weakest_async(abstract_program(q));
    auto ca = crw_var(wa.program(), rw_var(wa.program()));
    auto cb = crw_var(wb.program(), rw_var(wb.program()));
    for (const auto& [m, s] : ca) CHECK(leq_summary(s, cb.at(m)));
  }
}

TEST_CASE("concurrent summaries are contained in the full summaries") {
  for (const auto& p : random_corpus(61, 30)) {
    auto w = weakest_async(abstract_program(p));
    RwSummaries rw = rw_var(w.program());
    for (const auto& [m, s] : crw_var(w.program(), rw)) CHECK(leq_summary(s, rw.method.at(m)));
  }
}

TEST_CASE("under thread semantics the summary maxima are sound refactorings below the precise ones") {
  for (const char* name : {"start_join_sync", "two_threads", "guarded_write", "increment_racy"}) {
    CAPTURE(name);
    ProgramAst p = erase_await_vars(corpus(name));
    auto w = weakest_async(p);
    auto sharp = to_concrete(maxrel_sharp(to_abstract(w), nullptr, Semantics::Threads).result, w.shared_space());
    CHECK(mt_sound(sharp));
    CHECK(leq(sharp, mt_maxrel(w).result));
    CHECK(leq(sharp, to_concrete(maxrel_sharp(to_abstract(w)).result, w.shared_space())));
  }
}
