#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "asyncsynth/ast.hpp"

namespace asyncsynth {

struct ExplorationConfig {
  std::vector<std::int64_t> domain{0, 1};
  int loop_bound = 2;
  std::size_t max_states = 2'000'000;
  std::map<std::string, std::int64_t> initial;  // globals not listed start at 0

  void validate() const;
};

using TaskId = int;

enum class EventKind { Load, Store, Call, Await, Return, Continue };
std::string_view event_kind_name(EventKind k);

// Statement and variable tables of a compiled program; actions refer to
// entries by index.
struct ProgramIndex {
  std::vector<std::string> globals;
  std::vector<StmtId> stmts;

  int stmt_index(const StmtId& id) const;  // -1 if absent
  int global_index(std::string_view name) const;
};

struct Action {
  int id = 0;
  TaskId task = 0;
  EventKind kind = EventKind::Load;
  int var = -1;         // Load/Store
  TaskId target = 0;    // Call: callee task; Await: awaited task (0 for `*`)
  int stmt = -1;        // -1 only for Continue

  bool is_access() const { return kind == EventKind::Load || kind == EventKind::Store; }
  bool awaits_star() const { return kind == EventKind::Await && target == 0; }
};

struct Execution {
  std::shared_ptr<const ProgramIndex> index;
  std::vector<Action> actions;
  std::vector<std::int64_t> globals;  // final valuation, or at the failed assertion
  bool truncated = false;
  bool assert_failed = false;
};

enum class RunMode {
  Async,        // awaits suspend, `await *` in asyncify methods branches
  Synchronous,  // every await is a no-op
};

struct Frame {
  TaskId task = 0;
  int method = 0;
  int pc = 0;
  std::vector<std::int64_t> locals;
  std::vector<int> loop_iters;
  TaskId waits = 0;  // pending frames only: awaited task, kWaitStar for `*`
};
constexpr TaskId kWaitStar = -1;

struct Configuration {
  std::vector<std::int64_t> g;
  std::vector<Frame> stack;
  std::vector<Frame> pending;  // ordered by task id
  std::vector<char> completed;  // indexed by task id
  std::vector<TaskId> caller;   // indexed by task id, 0 for the root
  TaskId next_task = 1;
  TaskId atomic = 0;  // task resumed after `await *`, running uninterrupted
  bool truncated = false;
  bool assert_failed = false;
};

struct Step {
  std::optional<Action> action;  // absent for local (silent) steps
  Configuration next;
};

// Receives the actions of the current DFS path as they are appended and
// retracted, plus every completed execution. Returning false stops exploration.
class ExploreVisitor {
 public:
  virtual ~ExploreVisitor() = default;
  virtual void push(const Action&) {}
  virtual void pop() {}
  virtual bool complete(const Execution&) { return true; }
};

class Interpreter {
 public:
  Interpreter(const ProgramAst& p, ExplorationConfig cfg, RunMode mode = RunMode::Async);
  ~Interpreter();
  Interpreter(Interpreter&&) noexcept;

  const ProgramIndex& index() const;
  std::shared_ptr<const ProgramIndex> shared_index() const;

  Configuration initial_config() const;
  // Successors of `c`. Local steps (branches, local assignments) appear with no action.
  std::vector<Step> enabled_steps(const Configuration& c) const;

  // Depth-first over all maximal executions. Returns the number of states
  // visited. `reached_stmts`, indexed like index().stmts, marks every
  // statement executed on some path.
  std::size_t explore(ExploreVisitor& v, std::vector<char>* reached_stmts = nullptr) const;
  std::vector<Execution> explore_all() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

struct SyncResult {
  std::set<std::vector<std::int64_t>> finals;
  std::set<StmtId> reached;
  bool truncated = false;
};

SyncResult run_synchronous(const ProgramAst& p, const ExplorationConfig& cfg);

// Final valuations of every complete execution under the async semantics.
std::set<std::vector<std::int64_t>> final_valuations(const ProgramAst& p, const ExplorationConfig& cfg,
                                                     bool* truncated = nullptr);

}  // namespace asyncsynth
