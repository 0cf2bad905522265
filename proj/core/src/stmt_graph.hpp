#pragma once

// Statement-level control flow of one method. Compound statements are nodes
// of their own (the branch or loop test); the exit marker is the sink.

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "asyncsynth/ast.hpp"

namespace asyncsynth::detail {

struct StmtGraph {
  StmtId entry;
  StmtId exit;
  std::map<StmtId, std::vector<StmtId>> succ;
  std::map<StmtId, std::vector<StmtId>> pred;
  std::map<StmtId, const Stmt*> stmt;

  explicit StmtGraph(const MethodDef& m);

  // Nodes reachable from the successors (or predecessors when `backward`) of
  // `from`. Nodes for which `block` holds are reported but not expanded.
  std::set<StmtId> reach(const StmtId& from, bool backward,
                         const std::function<bool(const StmtId&)>& block) const;
};

inline bool is_counted(const Stmt& s) {
  return s.kind == StmtKind::Read || s.kind == StmtKind::Write || s.kind == StmtKind::Call;
}

bool contains_return(const Stmt& s);
bool has_counted(const Stmt& s);
void counted_in(const Stmt& s, std::vector<StmtId>& out);

// An `await var` insertion into the body list reached by `list_path`
// ((statement index, arm) pairs from the method body).
struct AwaitInsert {
  std::string method;
  std::vector<int> list_path;
  std::size_t pos = 0;
  int order = 0;  // ties at one position: lower order first
  std::string var;
};

// Applies the insertions and reassigns ids.
void apply_await_inserts(ProgramAst& p, std::vector<AwaitInsert> ins);

}  // namespace asyncsynth::detail
