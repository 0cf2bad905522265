#pragma once

// Flat instruction form shared by the async and the threaded interpreters.

#include <memory>
#include <vector>

#include "asyncsynth/interp.hpp"

namespace asyncsynth::detail {

enum class Op { Read, Write, Assign, Call, Return, AwaitVar, AwaitStar, Branch, LoopEnter, LoopTest, Jump, Assert };

struct ENode {
  ExprKind kind = ExprKind::Int;
  std::int64_t value = 0;
  int slot = -1;
  BinOp op = BinOp::Add;
  int l = -1, r = -1;
};

struct Instr {
  Op op = Op::Jump;
  int stmt = -1;
  int var = -1;     // global index
  int slot = -1;    // local slot
  int callee = -1;  // method index
  int expr = -1;    // root node in CMethod::exprs
  int target = -1;  // jump target
  int loop = -1;
};

struct CMethod {
  std::string name;
  std::vector<Instr> code;
  std::vector<ENode> exprs;
  int nlocals = 0;
  int nloops = 0;
  bool lambda = false;  // listed in asyncify
  bool sigma = false;   // member of sigma_star
};

struct Compiled {
  std::shared_ptr<ProgramIndex> index;
  std::vector<CMethod> methods;
  int main = 0;
};

Compiled compile(const ProgramAst& p);

// Initial global valuation; throws UndeclaredGlobal for unknown names.
std::vector<std::int64_t> initial_globals(const ProgramIndex& idx, const ExplorationConfig& cfg);

// All values `e` may take (sorted, unique).
void eval_all(const CMethod& m, int node, const std::vector<std::int64_t>& locals, TaskId self,
              const std::vector<std::int64_t>& domain, std::vector<std::int64_t>& out);

}  // namespace asyncsynth::detail
