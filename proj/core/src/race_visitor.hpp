#pragma once

// Collects data races along the DFS of an interpreter, one per statement pair.

#include <set>
#include <tuple>

#include "asyncsynth/traces.hpp"
#include "hb_tracker.hpp"

namespace asyncsynth::detail {

class RaceVisitor : public ExploreVisitor {
 public:
  RaceVisitor(std::shared_ptr<const ProgramIndex> idx, std::size_t limit, HbTracker hb = {})
      : idx_(std::move(idx)), limit_(limit), hb_(std::move(hb)) {
    by_var_.resize(idx_->globals.size());
  }

  void push(const Action& a) override {
    hb_.push(a);
    if (!a.is_access()) return;
    const auto& pred = hb_.hbpred(a.id);
    for (int b : by_var_[a.var]) {
      const Action& ab = hb_.action(b);
      if (ab.kind != EventKind::Store && a.kind != EventKind::Store) continue;
      if (pred.test(b)) continue;
      bool b_first = hb_.so_less(b, a.id);
      record(b_first ? b : a.id, b_first ? a.id : b);
    }
    by_var_[a.var].push_back(a.id);
  }

  void pop() override {
    const Action& a = hb_.action(hb_.size() - 1);
    if (a.is_access()) by_var_[a.var].pop_back();
    hb_.pop();
  }

  bool complete(const Execution& e) override {
    out.truncated = out.truncated || e.truncated;
    for (auto i : waiting_) out.races[i].witness = e;
    waiting_.clear();
    return !(limit_ && out.races.size() >= limit_);
  }

  RaceSearch out;

 private:
  std::shared_ptr<const ProgramIndex> idx_;
  std::size_t limit_;
  HbTracker hb_;
  std::vector<std::vector<int>> by_var_;
  std::set<std::tuple<int, int, int>> seen_;
  std::vector<std::size_t> waiting_;

  void record(int a1, int a2) {
    const Action& x = hb_.action(a1);
    const Action& y = hb_.action(a2);
    if (!seen_.insert({x.var, x.stmt, y.stmt}).second) return;
    DataRace d;
    d.var = idx_->globals[x.var];
    d.first_stmt = idx_->stmts[x.stmt];
    d.second_stmt = idx_->stmts[y.stmt];
    d.first = a1;
    d.second = a2;
    if (auto rc = hb_.root_cause(a1, a2))
      d.cause = {idx_->stmts[hb_.action(rc->first).stmt], idx_->stmts[hb_.action(rc->second).stmt]};
    waiting_.push_back(out.races.size());
    out.races.push_back(std::move(d));
  }
};


// Sorted by (second statement, first statement, variable).
void sort_races(std::vector<DataRace>& races);

}  // namespace asyncsynth::detail
