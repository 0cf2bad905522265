#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "asyncsynth/space.hpp"
#include "asyncsynth/traces.hpp"

namespace asyncsynth {

// Moves the awaits of `rc.call` up so that none follows `rc.anchor`.
Asynchronization repair_data_race(const Asynchronization& a, const RootCause& rc);

// Synchronous program that simulates asynchronous executions of `a` in which
// an instance of s1 is delayed, and fails an assertion at s2 when the two
// are concurrent. The globals __sc and __s then hold codes of the root cause.
struct Instrumented {
  ProgramAst program;
  StmtId s1, s2;
  std::vector<StmtId> codes;  // code k (k >= 1) names codes[k - 1]
};

Instrumented instrument_pair(const Asynchronization& a, const StmtId& s1, const StmtId& s2);

struct InstrumentedRun {
  std::optional<RootCause> cause;  // set iff the assertion can fail
  bool truncated = false;
  std::size_t states = 0;
};

InstrumentedRun run_instrumented(const Instrumented& in, const ExplorationConfig& cfg);

enum class RaceOracle {
  Instrumented,  // pairwise instrumentation run synchronously
  Explore,       // exhaustive asynchronous exploration
};

enum class Semantics {
  Async,    // asynchronous calls and awaits
  Threads,  // start/join; races always come from exploration
};

struct RepairOptions {
  ExplorationConfig cfg;
  RaceOracle oracle = RaceOracle::Instrumented;
  Semantics semantics = Semantics::Async;
};

struct MinRace {
  RootCause cause;
  StmtId first, second;
};

struct RcResult {
  std::optional<MinRace> race;
  bool truncated = false;
};

struct RepairStep {
  MinRace race;
  std::vector<int> moved;  // calls whose awaits moved
};

struct MaxRelResult {
  Asynchronization result;
  std::vector<RepairStep> steps;
  bool truncated = false;
};

struct RepairCounters {
  std::size_t oracle_calls = 0;  // instrumented runs or explorations
  std::size_t states = 0;
};

// Shares the statement order and pair list of one synchronous program across
// many oracle queries. Not safe for concurrent use.
class RepairEngine {
 public:
  RepairEngine(std::shared_ptr<const AsyncSpace> space, RepairOptions opt);

  RcResult rc_min_drace(const Asynchronization& a);
  MaxRelResult maxrel(const Asynchronization& a);

  const StmtOrder& order() const { return order_; }
  // Candidate pairs (s1, s2), colexicographic in the statement order.
  const std::vector<std::pair<StmtId, StmtId>>& pairs() const { return pairs_; }
  RepairCounters& counters() { return counters_; }
  const RepairCounters& counters() const { return counters_; }
  const RepairOptions& options() const { return opt_; }

 private:
  std::shared_ptr<const AsyncSpace> space_;
  RepairOptions opt_;
  StmtOrder order_;
  std::vector<std::pair<StmtId, StmtId>> pairs_;
  RepairCounters counters_;

  RcResult by_instrumentation(const Asynchronization& a);
  RcResult by_exploration(const Asynchronization& a);
};

RcResult rc_min_drace(const Asynchronization& a, const RepairOptions& opt = {});
MaxRelResult maxrel(const Asynchronization& a, const RepairOptions& opt = {});

}  // namespace asyncsynth
