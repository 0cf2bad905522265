#pragma once

// Happens-before bookkeeping maintained along a DFS path: every pushed action
// gets the set of its hb-predecessors, computed from its direct predecessors.

#include <boost/dynamic_bitset.hpp>
#include <optional>
#include <utility>
#include <vector>

#include "asyncsynth/traces.hpp"

namespace asyncsynth::detail {

class HbTracker {
 public:
  HbTracker() = default;
  // Thread semantics: a call whose statement index is marked in `spawns`
  // starts a thread and contributes no edge back to the caller.
  explicit HbTracker(std::vector<char> spawns) : threads_(true), spawns_(std::move(spawns)) {}

  void push(const Action& a);  // a.id must equal size()
  void pop();

  int size() const { return static_cast<int>(path_.size()); }
  const Action& action(int i) const { return path_[i].a; }
  const boost::dynamic_bitset<>& hbpred(int i) const { return path_[i].hb; }
  bool so_less(int i, int j) const;
  bool co(int i, int j) const;
  int lca_call(int a1, int a2) const;
  // (call action, anchor action) of the race (a1, a2), a1 so-first.
  std::optional<std::pair<int, int>> root_cause(int a1, int a2) const;

 private:
  struct Entry {
    Action a;
    int mo_index = 0;
    std::vector<int> key;  // call positions along the ancestor chain, then mo index
    boost::dynamic_bitset<> hb;
  };
  struct TaskState {
    std::vector<int> actions;
    int call_action = -1;
    TaskId parent = 0;
    int first_await = -1;
    std::vector<int> prefix;
  };

  bool threads_ = false;
  std::vector<char> spawns_;
  std::vector<Entry> path_;
  std::vector<TaskState> tasks_;

  int last_action(TaskId t) const;
  bool ancestor_or_self(TaskId anc, TaskId t) const;
  TaskId child_toward(TaskId anc, TaskId t) const;
};

// Pushes every action of `e` into `h` and reads off mo, co, so and hb.
Trace orders_from(const Execution& e, HbTracker h);

}  // namespace asyncsynth::detail
