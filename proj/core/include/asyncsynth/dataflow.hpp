#pragma once

#include <map>
#include <set>
#include <string>

#include "asyncsynth/repair.hpp"
#include "asyncsynth/space.hpp"

namespace asyncsynth {

// Conditions become `*` and every loop becomes a one-armed conditional over
// its body (marked from_loop). Statement ids are unchanged.
ProgramAst abstract_program(const ProgramAst& p);

struct AccessSummary {
  std::set<std::string> reads;
  std::set<std::string> writes;

  bool operator==(const AccessSummary&) const = default;
  void merge(const AccessSummary& o);
};

struct RwSummaries {
  std::map<std::string, AccessSummary> method;
  std::map<StmtId, AccessSummary> stmt;  // reads, writes and calls only
};

RwSummaries rw_var(const ProgramAst& p);

// Accesses of each method that may run concurrently with what its caller
// does after the call returns.
std::map<std::string, AccessSummary> crw_var(const ProgramAst& materialized, const RwSummaries& rw);

bool conflicts(const AccessSummary& a, const AccessSummary& b);

// Summary-based maximal asynchronization relative to `a`, for `a` in the
// space of an abstracted program. Step races carry only the anchor. Under
// thread semantics a started method runs concurrently with everything after
// the start, so its concurrent summary is its whole access summary.
MaxRelResult maxrel_sharp(const Asynchronization& a, std::size_t* summary_ops = nullptr,
                          Semantics semantics = Semantics::Async);

// Same bits in the space of the abstraction, and back.
Asynchronization to_abstract(const Asynchronization& a);
Asynchronization to_concrete(const Asynchronization& abstract_a, const std::shared_ptr<const AsyncSpace>& concrete);

}  // namespace asyncsynth
