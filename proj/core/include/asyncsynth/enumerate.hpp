#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "asyncsynth/repair.hpp"
#include "asyncsynth/space.hpp"

namespace asyncsynth {

enum class EnumMode { Precise, Dataflow };

struct EnumOutput {
  Asynchronization async;   // in the space of the input program
  int bound = 0;            // only elements below this index could still be uncovered
  std::vector<int> moved;   // calls whose awaits the maximality step moved
  std::size_t oracle_calls = 0;    // since the previous output
  std::size_t predecessors = 0;    // since the previous output
};

struct EnumOptions {
  EnumMode mode = EnumMode::Precise;
  RepairOptions repair;
  std::size_t limit = 0;  // 0: no limit
  std::function<void(const EnumOutput&)> on_output;
  // Replaceable for negative tests.
  std::function<std::vector<Move>(const Asynchronization&, int)> next = next_ele;
};

struct EnumerationRun {
  EnumMode mode = EnumMode::Precise;
  std::vector<EnumOutput> outputs;
  bool duplicates = false;  // some asynchronization was produced twice
  bool truncated = false;   // exploration hit the loop bound somewhere
  bool partial = false;     // stopped by the limit
  // Branches whose maximal element uncovered something at or above the
  // bound; no sound element lies in such a branch.
  std::size_t pruned = 0;
};

EnumerationRun asy_syn(const ProgramAst& p, const EnumOptions& opt = {});

struct DelayRow {
  std::size_t index = 0;
  std::size_t oracle_calls = 0;
  std::size_t predecessors = 0;
  std::size_t work() const { return oracle_calls + predecessors; }
};

std::vector<DelayRow> delay_report(const EnumerationRun& run);

}  // namespace asyncsynth
