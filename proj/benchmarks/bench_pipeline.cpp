#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include <asyncsynth/dataflow.hpp>
#include <asyncsynth/enumerate.hpp>
#include <asyncsynth/frontend.hpp>
#include <asyncsynth/multithread.hpp>

using namespace asyncsynth;

namespace {

std::string source(const char* name) {
  std::ifstream in(std::string(ASYNCSYNTH_CORPUS_DIR) + "/" + name + ".tal");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProgramAst base(const char* name) { return erase_await_vars(parse_program(source(name))); }

// k calls of one IO method; each call is followed by an unrelated write and
// a write the callee conflicts with.
ProgramAst straight_line(int k) {
  std::string s = "globals x";
  for (int i = 1; i <= k; ++i) s += ", z" + std::to_string(i);
  s += ";\nasyncify io;\nmethod Main {\n";
  for (int i = 1; i <= k; ++i) {
    auto n = std::to_string(i);
    s += "  t" + n + " := call io;\n  z" + n + " := 1;\n  x := " + n + ";\n";
  }
  return parse_program(s + "}\nmethod io {\n  await *;\n  x := 0;\n}\n");
}

void BM_Parse(benchmark::State& st) {
  std::string text = source("two_threads");
  for (auto _ : st) benchmark::DoNotOptimize(parse_program(text));
}
BENCHMARK(BM_Parse);

void BM_FindRaces(benchmark::State& st) {
  ProgramAst p = weakest_async(base("two_threads")).program();
  for (auto _ : st) benchmark::DoNotOptimize(find_data_races(p, {}));
}
BENCHMARK(BM_FindRaces);

void BM_MaxRelInstrumented(benchmark::State& st) {
  auto w = weakest_async(base("guarded_write"));
  for (auto _ : st) benchmark::DoNotOptimize(maxrel(w));
}
BENCHMARK(BM_MaxRelInstrumented);

void BM_MaxRelExplore(benchmark::State& st) {
  auto w = weakest_async(base("guarded_write"));
  RepairOptions o;
  o.oracle = RaceOracle::Explore;
  for (auto _ : st) benchmark::DoNotOptimize(maxrel(w, o));
}
BENCHMARK(BM_MaxRelExplore);

void BM_MaxRelSummaries(benchmark::State& st) {
  auto w = to_abstract(weakest_async(base("guarded_write")));
  for (auto _ : st) benchmark::DoNotOptimize(maxrel_sharp(w));
}
BENCHMARK(BM_MaxRelSummaries);

void BM_EnumeratePrecise(benchmark::State& st) {
  ProgramAst p = base("two_threads");
  for (auto _ : st) benchmark::DoNotOptimize(asy_syn(p));
}
BENCHMARK(BM_EnumeratePrecise)->Unit(benchmark::kMillisecond);

void BM_EnumerateDataflow(benchmark::State& st) {
  ProgramAst p = straight_line(static_cast<int>(st.range(0)));
  EnumOptions o;
  o.mode = EnumMode::Dataflow;
  std::size_t outputs = 0;
  for (auto _ : st) outputs = asy_syn(p, o).outputs.size();
  st.counters["outputs"] = static_cast<double>(outputs);
  st.counters["per_output"] = benchmark::Counter(static_cast<double>(outputs), benchmark::Counter::kIsIterationInvariantRate |
                                                                                    benchmark::Counter::kInvert);
}
BENCHMARK(BM_EnumerateDataflow)->DenseRange(2, 8)->Unit(benchmark::kMillisecond);

void BM_ThreadMaxRel(benchmark::State& st) {
  auto w = weakest_async(base("two_threads"));
  for (auto _ : st) benchmark::DoNotOptimize(mt_maxrel(w));
}
BENCHMARK(BM_ThreadMaxRel);

}  // namespace

BENCHMARK_MAIN();
