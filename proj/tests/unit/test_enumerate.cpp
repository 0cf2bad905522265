#include <doctest.h>

#include <asyncsynth/dataflow.hpp>
#include <asyncsynth/enumerate.hpp>
#include <asyncsynth/frontend.hpp>

#include "oracles.hpp"
#include "random_programs.hpp"

using namespace asyncsynth;
using namespace asyncsynth::testing;

namespace {

using Vec = std::vector<int>;

ProgramAst corpus(const std::string& name) { return erase_await_vars(parse_program(read_text(corpus_path(name)))); }

std::set<Bits> bits(const EnumerationRun& r) {
  std::set<Bits> out;
  for (const auto& o : r.outputs) out.insert(o.async.covered());
  return out;
}

std::multiset<Vec> vectors(const EnumerationRun& r) {
  std::multiset<Vec> out;
  for (const auto& o : r.outputs) out.insert(distance_vector(o.async));
  return out;
}

}  // namespace

TEST_CASE("file-length example: the four sound placements, each once") {
  EnumerationRun r = asy_syn(corpus("rdfile_sync"));
  CHECK(vectors(r) == std::multiset<Vec>{{1, 1}, {1, 0}, {0, 1}, {0, 0}});
  CHECK(distance_vector(r.outputs.front().async) == Vec{1, 1});
  CHECK_FALSE(r.duplicates);
  CHECK_FALSE(r.partial);
  auto rows = delay_report(r);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].index == i);
  CHECK(rows[0].oracle_calls > 0);
}

TEST_CASE("nothing asyncified: the program itself is the only output") {
  EnumerationRun r = asy_syn(corpus("minimal"));
  REQUIRE(r.outputs.size() == 1);
  CHECK(structurally_equal(r.outputs[0].async.program(), corpus("minimal")));
}

TEST_CASE("outputs arrive through the callback in order") {
  std::vector<Vec> seen;
  EnumOptions opt;
  opt.on_output = [&](const EnumOutput& o) { seen.push_back(distance_vector(o.async)); };
  EnumerationRun r = asy_syn(corpus("rdfile_sync"), opt);
  REQUIRE(seen.size() == r.outputs.size());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == distance_vector(r.outputs[i].async));
}

TEST_CASE("start/join example under async semantics") {
  CHECK(vectors(asy_syn(corpus("start_join_sync"))) == std::multiset<Vec>{{0, 0}, {0, 1}, {1, 1}});
}

TEST_CASE("frozen sound-set sizes on the corpus, and equality with brute force") {
  // Sizes from brute-force filtering of every placement.
  const std::vector<std::pair<const char*, std::size_t>> frozen = {
      {"rdfile_sync", 4}, {"guarded_write", 16}, {"start_join_sync", 3}, {"two_threads", 42},
  };
  for (const auto& [name, n] : frozen) {
    CAPTURE(name);
    ProgramAst p = corpus(name);
    EnumerationRun r = asy_syn(p);
    CHECK(r.outputs.size() == n);
    CHECK_FALSE(r.duplicates);
    CHECK(bits(r) == brute_force(p, {}).sound_set());
  }
}

TEST_CASE("enumeration is complete and duplicate-free on generated programs") {
  std::uint64_t seed = 2000;
  for (int i = 0; i < 40; ++i) {
    std::uint64_t used = 0;
    ProgramAst p = random_program(seed, {}, &used);
    seed = used + 1;
    CAPTURE(used);
    EnumerationRun r = asy_syn(p);
    CHECK_FALSE(r.duplicates);
    CHECK(bits(r).size() == r.outputs.size());
    CHECK(bits(r) == brute_force(p, {}).sound_set());
  }
}

TEST_CASE("the unrestricted predecessor generator repeats outputs") {
  // Without the bound every sound element is reached once per order of
  // uncovering; any lattice with two incomparable moves shows it.
  EnumOptions opt;
  opt.next = [](const Asynchronization& a, int) { return immediate_predecessors(a); };
  EnumerationRun r = asy_syn(corpus("rdfile_sync"), opt);
  CHECK(r.duplicates);
  CHECK(bits(r).size() == 4);
}

TEST_CASE("dataflow mode produces sound placements only") {
  for (const char* name : {"rdfile_sync", "guarded_write", "two_threads", "branch_increment", "sleep_right"}) {
    CAPTURE(name);
    ProgramAst p = corpus(name);
    EnumOptions opt;
    opt.mode = EnumMode::Dataflow;
    EnumerationRun r = asy_syn(p, opt);
    CHECK(r.mode == EnumMode::Dataflow);
    CHECK_FALSE(r.duplicates);
    CHECK_FALSE(r.outputs.empty());
    auto sound = brute_force(p, {}).sound_set();
    for (const auto& b : bits(r)) CHECK(sound.count(b));
  }
}

TEST_CASE("dataflow mode misses the placement that relies on a guard") {
  ProgramAst p = corpus("guarded_write");
  EnumOptions opt;
  opt.mode = EnumMode::Dataflow;
  EnumerationRun sharp = asy_syn(p, opt);
  EnumerationRun precise = asy_syn(p);
  CHECK(bits(sharp).size() < bits(precise).size());
  CHECK(vectors(precise).count({1, 3, 2}) == 1);
  CHECK(vectors(sharp).count({1, 3, 2}) == 0);
}

TEST_CASE("a limit stops early and marks the run partial") {
  EnumOptions opt;
  opt.limit = 2;
  EnumerationRun r = asy_syn(corpus("two_threads"), opt);
  CHECK(r.outputs.size() == 2);
  CHECK(r.partial);
}
