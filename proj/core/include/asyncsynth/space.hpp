#pragma once

#include <map>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "asyncsynth/ast.hpp"

namespace asyncsynth {

// An asynchronous call of the synchronous program whose await can move.
struct CallSite {
  StmtId call;
  std::string method;
  std::string var;
  std::string callee;
  int first = 0;  // its elements are [first, first + count)
  int count = 0;
};

// One step an await can move past: a read, write or call, or a whole loop
// that contains such statements.
struct PlacementElement {
  int call = 0;
  StmtId unit;                 // the statement, or the loop
  std::vector<StmtId> stmts;   // counted statements it stands for
  std::vector<int> preds;      // elements that must be covered first
  std::vector<int> succs;
};

// Lattice of await placements of one synchronous program. Calls are indexed
// in the await order of the weakest asynchronization.
class AsyncSpace {
 public:
  // `p` may already contain `await r` statements; they are dropped.
  explicit AsyncSpace(const ProgramAst& p);

  const ProgramAst& base() const { return base_; }
  const std::vector<CallSite>& calls() const { return calls_; }
  const std::vector<PlacementElement>& elements() const { return elems_; }
  std::size_t size() const { return elems_.size(); }

  int call_index(const StmtId& call) const;                 // -1 if not an asynchronous call
  int element_of(int call, const StmtId& stmt) const;       // -1 if outside the call's range
  bool is_downset(const std::vector<bool>& covered) const;
  std::vector<int> up_closure(int element) const;

  // Inserts the awaits described by `covered` into a copy of the base.
  ProgramAst materialize(const std::vector<bool>& covered) const;

  struct Impl;

 private:
  ProgramAst base_;
  std::vector<CallSite> calls_;
  std::vector<PlacementElement> elems_;
  std::shared_ptr<const Impl> impl_;
};

class Asynchronization {
 public:
  Asynchronization(std::shared_ptr<const AsyncSpace> space, std::vector<bool> covered);
  // Uses `program` instead of the canonical materialization.
  Asynchronization(std::shared_ptr<const AsyncSpace> space, std::vector<bool> covered, ProgramAst program);

  const AsyncSpace& space() const { return *space_; }
  const std::shared_ptr<const AsyncSpace>& shared_space() const { return space_; }
  const std::vector<bool>& covered() const { return covered_; }
  const ProgramAst& program() const;

  // call statement -> ids of its awaits in program()
  std::map<StmtId, std::vector<StmtId>> placement() const;
  Asynchronization with(std::vector<bool> covered) const { return {space_, std::move(covered)}; }

  bool operator==(const Asynchronization& o) const { return covered_ == o.covered_; }
  bool operator<(const Asynchronization& o) const { return covered_ < o.covered_; }

 private:
  std::shared_ptr<const AsyncSpace> space_;
  std::vector<bool> covered_;
  mutable std::shared_ptr<const ProgramAst> program_;
};

Asynchronization strong_async(const std::shared_ptr<const AsyncSpace>& s);
Asynchronization weakest_async(const std::shared_ptr<const AsyncSpace>& s);
Asynchronization strong_async(const ProgramAst& p);
Asynchronization weakest_async(const ProgramAst& p);
// The lattice element of a program that already places its awaits. Throws
// Unrepresentable when some await position has no counterpart.
Asynchronization asynchronization_of(const ProgramAst& p);

using CoverSet = std::map<StmtId, std::set<StmtId>>;

// Counted statements on control-flow paths from each await's call to the await.
CoverSet cover(const ProgramAst& materialized);
CoverSet cover(const Asynchronization& a);

bool leq(const Asynchronization& a, const Asynchronization& b);  // throws DifferentBase

struct Move {
  Asynchronization result;
  int call;     // index of the call whose await moved up
  int element;  // the element it uncovered
};

std::vector<Move> immediate_predecessors(const Asynchronization& a);
// Await ids of the weakest asynchronization, in await order.
std::vector<StmtId> await_order(const AsyncSpace& s);
// Immediate predecessors that uncover an element of index below `bound`.
// Element indices are call-major in await order and extend the element order,
// so on a chain per call this moves exactly the awaits up to a given one.
std::vector<Move> next_ele(const Asynchronization& a, int bound);

// Cover sizes of the awaits, calls in await order, awaits of one call in text order.
std::vector<int> distance_vector(const Asynchronization& a);

// Every downset of the lattice.
std::vector<Asynchronization> all_downsets(const std::shared_ptr<const AsyncSpace>& s, std::size_t limit = 1u << 20);

// Independent enumeration: tries sets of raw await positions per call, keeps
// the ones whose paths match each call with exactly one await, and groups
// them by cover. Each result carries one representative program.
std::vector<Asynchronization> all_asyncs_bruteforce(const ProgramAst& p, std::size_t limit = 1u << 16);

}  // namespace asyncsynth
