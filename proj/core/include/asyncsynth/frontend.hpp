#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asyncsynth/ast.hpp"

namespace asyncsynth {

ProgramAst parse_program(std::string_view text);
std::string pretty_print(const ProgramAst& p);

// `file:line:col: code: message`
std::string format_diagnostic(std::string_view file, SourceLoc loc, std::string_view code,
                              std::string_view message);

struct BasicBlock {
  std::vector<StmtId> stmts;
  std::vector<int> succ;
  std::vector<int> pred;
};

struct Cfg {
  std::vector<BasicBlock> blocks;
  std::vector<std::pair<int, int>> edges;
  int entry = 0;
  std::vector<int> exits;
  std::set<std::pair<int, int>> back_edges;
  std::vector<int> idom;  // idom[entry] == entry
  std::map<StmtId, int> block_of;

  bool dominates(int a, int b) const;
};

Cfg build_cfg(const MethodDef& m);

enum class ViolationKind {
  DistinctVariable,  // condition 1
  Dominance,         // condition 2
  AwaitOnAllPaths,   // condition 3
  UnmatchedAwait,
  MisplacedReturn,
  MissingElse,       // strict mode only
};

struct Violation {
  ViolationKind kind;
  std::string method;
  std::vector<StmtId> stmts;
  SourceLoc loc;
  std::string message;

  int condition() const;  // 1..3 for the well-formedness conditions, 0 otherwise
  std::string_view code() const;
};

std::vector<Violation> check_well_formed(const ProgramAst& p);
// Else-less conditionals, reported only under --strict.
std::vector<Violation> strict_findings(const ProgramAst& p);

// call -> matching awaits. Every call to a method of sigma_star appears as a key.
std::map<StmtId, std::set<StmtId>> matching_await_map(const ProgramAst& p);

std::set<std::string> sigma_star(const ProgramAst& p);
std::set<std::string> sigma_star(const ProgramAst& p, const std::set<std::string>& lambda);

// Methods ordered callers-first (ties by declaration order).
std::vector<std::string> top_down_order(const ProgramAst& p);

}  // namespace asyncsynth
