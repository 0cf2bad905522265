#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "asyncsynth/interp.hpp"

namespace asyncsynth {

// Dense boolean matrix over action ids.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  std::size_t size() const { return n_; }
  bool test(std::size_t i, std::size_t j) const { return bits_[i * words_ + j / 64] >> (j % 64) & 1; }
  void set(std::size_t i, std::size_t j) { bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64); }
  bool contains(const Relation& o) const;  // o ⊆ this
  bool irreflexive() const;
  bool transitive() const;
  std::size_t count() const;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct Trace {
  Execution exec;
  Relation mo, co, so, hb;
};

Trace compute_orders(const Execution& e);

struct RootCause {
  StmtId call;    // s_c
  StmtId anchor;  // s

  auto operator<=>(const RootCause&) const = default;
};

// Call action in the least common ancestor task of the two actions that leads
// toward the task of `a1`.
int lca_call_action(const Execution& e, int a1, int a2);
RootCause root_cause(const Execution& e, int a1, int a2);

struct DataRace {
  std::string var;
  StmtId first_stmt;   // so-first
  StmtId second_stmt;
  int first = -1;      // action ids in the witness
  int second = -1;
  RootCause cause;
  Execution witness;   // first complete execution after the race was seen
};

struct RaceSearch {
  std::vector<DataRace> races;  // deduplicated by statement pair
  bool truncated = false;
  std::size_t states = 0;
};

// `limit` > 0 stops exploring once that many distinct races are known; the
// execution that crosses the limit may contribute several.
RaceSearch find_data_races(const ProgramAst& p, const ExplorationConfig& cfg, std::size_t limit = 0);

std::set<StmtId> synchronously_reachable(const ProgramAst& p_sync, const ExplorationConfig& cfg);

// Forward reachability in the interprocedural CFG without back edges.
class ForwardReach {
 public:
  explicit ForwardReach(const ProgramAst& p);
  bool reaches(const StmtId& from, const StmtId& to) const;

 private:
  std::map<StmtId, std::vector<StmtId>> succ_;
  mutable std::map<StmtId, std::set<StmtId>> cache_;
};

// First-occurrence order over read/write statements of the synchronous program.
class StmtOrder {
 public:
  StmtOrder() = default;
  StmtOrder(const ProgramAst& p_sync, const ExplorationConfig& cfg);

  bool prec(const StmtId& a, const StmtId& b) const;
  // Order on accesses: a ≺ b, and b ⊀ a unless b is forward-reachable from a.
  bool prec_so(const StmtId& a, const StmtId& b) const;
  // Position in a fixed linear extension of prec_so (ties by StmtId).
  int rank(const StmtId& s) const;
  const std::set<StmtId>& reachable() const { return reachable_; }
  const std::vector<StmtId>& accesses() const { return accesses_; }
  bool truncated() const { return truncated_; }

 private:
  std::set<StmtId> reachable_;
  std::vector<StmtId> accesses_;  // synchronously reachable reads/writes
  std::set<std::pair<StmtId, StmtId>> prec_;
  std::map<StmtId, int> rank_;
  std::shared_ptr<ForwardReach> fwd_;
  bool truncated_ = false;
};

bool stmt_prec(const ProgramAst& p_sync, const StmtId& a, const StmtId& b, const ExplorationConfig& cfg);
// Same relation via a flag-setting instrumentation of the synchronous program.
bool stmt_prec_instrumented(const ProgramAst& p_sync, const StmtId& a, const StmtId& b,
                            const ExplorationConfig& cfg);

// Colexicographic order on races (second statement first).
bool race_prec_so(const StmtOrder& order, const DataRace& d1, const DataRace& d2);

}  // namespace asyncsynth
