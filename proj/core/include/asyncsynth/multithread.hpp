#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <vector>

#include "asyncsynth/repair.hpp"
#include "asyncsynth/space.hpp"
#include "asyncsynth/traces.hpp"

namespace asyncsynth {

// A start/join refactoring places joins exactly where an asynchronization
// places awaits, so both live in the same lattice. Only the semantics differ:
// every call of an asynchronous method starts a thread, `await r` joins it,
// and threads interleave at every global access.
using MtRefactoring = Asynchronization;

class ThreadInterpreter {
 public:
  ThreadInterpreter(const ProgramAst& p, ExplorationConfig cfg);
  ~ThreadInterpreter();
  ThreadInterpreter(ThreadInterpreter&&) noexcept;

  const ProgramIndex& index() const;
  std::shared_ptr<const ProgramIndex> shared_index() const;
  // Indexed like index().stmts: the statement is a call that starts a thread.
  const std::vector<char>& spawns() const;

  // Explores every interleaving of global accesses. Local steps of a thread
  // run eagerly since they commute with everything else. `await *` is a no-op.
  std::size_t explore(ExploreVisitor& v) const;
  std::vector<Execution> explore_all() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

// Orders of an execution of `in`: program order per task, start edges and
// join edges. A start is not followed by any edge back from the new thread.
Trace mt_compute_orders(const ThreadInterpreter& in, const Execution& e);

RaceSearch mt_find_races(const ProgramAst& p, const ExplorationConfig& cfg, std::size_t limit = 0);
std::set<std::vector<std::int64_t>> mt_final_valuations(const ProgramAst& p, const ExplorationConfig& cfg,
                                                        bool* truncated = nullptr);

bool mt_sound(const MtRefactoring& r, const ExplorationConfig& cfg = {});

// Moves the join of rc.call up so it precedes rc.anchor.
MtRefactoring mt_repair(const MtRefactoring& r, const RootCause& rc);

// Unique maximal sound refactoring below `r`, repairing the least race first.
MaxRelResult mt_maxrel(const MtRefactoring& r, const ExplorationConfig& cfg = {});

}  // namespace asyncsynth
