#include "asyncsynth/enumerate.hpp"

#include <set>

#include "asyncsynth/dataflow.hpp"

namespace asyncsynth {

namespace {

struct Stop {};

class Enumerator {
 public:
  Enumerator(const ProgramAst& p, const EnumOptions& opt) : opt_(opt) {
    concrete_ = std::make_shared<const AsyncSpace>(p);
    run_.mode = opt.mode;
    if (opt.mode == EnumMode::Dataflow) {
      space_ = std::make_shared<const AsyncSpace>(abstract_program(concrete_->base()));
      if (space_->size() != concrete_->size())
        throw Error(ErrorCode::Unrepresentable, "abstraction changed the placement lattice");
    } else {
      space_ = concrete_;
      engine_.emplace(space_, opt.repair);
    }
  }

  EnumerationRun run() {
    try {
      rec(weakest_async(space_), static_cast<int>(space_->size()));
    } catch (const Stop&) {
      run_.partial = true;
    }
    return std::move(run_);
  }

 private:
  const EnumOptions& opt_;
  std::shared_ptr<const AsyncSpace> concrete_, space_;
  std::optional<RepairEngine> engine_;
  EnumerationRun run_;
  std::set<std::vector<bool>> seen_;
  std::size_t sharp_ops_ = 0;
  std::size_t oracle_mark_ = 0, preds_ = 0, preds_mark_ = 0;

  std::size_t oracle_total() const { return engine_ ? engine_->counters().oracle_calls : sharp_ops_; }

  // Emits the sound elements below `a` that agree with it on every element
  // of index >= bound.
  void rec(const Asynchronization& a, int bound) {
    if (opt_.limit && run_.outputs.size() >= opt_.limit) throw Stop{};
    MaxRelResult m = engine_ ? engine_->maxrel(a) : maxrel_sharp(a, &sharp_ops_, opt_.repair.semantics);
    run_.truncated = run_.truncated || m.truncated;
    for (std::size_t e = bound; e < a.covered().size(); ++e)
      if (a.covered()[e] != m.result.covered()[e]) {
        ++run_.pruned;
        return;
      }

    EnumOutput out{to_concrete(m.result, concrete_), bound, {}, oracle_total() - oracle_mark_, preds_ - preds_mark_};
    for (const auto& s : m.steps) out.moved.insert(out.moved.end(), s.moved.begin(), s.moved.end());
    oracle_mark_ = oracle_total();
    preds_mark_ = preds_;
    if (!seen_.insert(m.result.covered()).second) run_.duplicates = true;
    if (opt_.on_output) opt_.on_output(out);
    run_.outputs.push_back(std::move(out));

    auto next = opt_.next(m.result, bound);
    preds_ += next.size();
    for (auto it = next.rbegin(); it != next.rend(); ++it) rec(it->result, it->element);
  }
};

}  // namespace

EnumerationRun asy_syn(const ProgramAst& p, const EnumOptions& opt) { return Enumerator(p, opt).run(); }

std::vector<DelayRow> delay_report(const EnumerationRun& run) {
  std::vector<DelayRow> rows;
  for (std::size_t i = 0; i < run.outputs.size(); ++i)
    rows.push_back({i, run.outputs[i].oracle_calls, run.outputs[i].predecessors});
  return rows;
}

}  // namespace asyncsynth
