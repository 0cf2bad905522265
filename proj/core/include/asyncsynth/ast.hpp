#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace asyncsynth {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

// Statement identity: method name plus an index path into the statement tree.
// `await r` statements do not consume an index; they are addressed by the gap
// they sit in (the index of the next ordinary statement) and an ordinal slot,
// so inserting or removing them never renumbers anything else.
struct StmtId {
  std::string method;
  std::vector<int> path;
  int slot = -1;      // >= 0 only for `await r`
  bool exit = false;  // method exit marker (implicit return)

  auto operator<=>(const StmtId&) const = default;
  bool operator==(const StmtId&) const = default;

  bool is_await_slot() const { return slot >= 0; }
  std::string str() const;
  static StmtId parse(std::string_view text);
  static StmtId exit_of(std::string method);
};

enum class ErrorCode {
  SyntaxError,
  UndeclaredGlobal,
  DuplicateMethod,
  RecursionDetected,
  UnmatchedAwait,
  UnknownMethod,
  MissingMain,
  AsyncifyNotBase,
  StateBudgetExceeded,
  SpaceBudgetExceeded,
  DifferentBase,
  InvalidRootCause,
  StuckState,
  Unrepresentable,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, SourceLoc loc = {}, std::string expected = {})
      : std::runtime_error(std::move(message)), code_(code), loc_(loc), expected_(std::move(expected)) {}
  ErrorCode code() const { return code_; }
  SourceLoc loc() const { return loc_; }
  const std::string& expected() const { return expected_; }

 private:
  ErrorCode code_;
  SourceLoc loc_;
  std::string expected_;
};

enum class BinOp { Add, Sub, Eq, Ne, Lt };

enum class ExprKind {
  Int,
  Local,
  Star,    // value drawn from the exploration domain
  Choice,  // boolean coin, always {0, 1} (instrumentation only)
  Self,    // id of the running task (instrumentation only)
  Binary,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Int;
  std::int64_t value = 0;
  std::string name;
  BinOp op = BinOp::Add;
  ExprPtr lhs;
  ExprPtr rhs;

  static ExprPtr integer(std::int64_t v);
  static ExprPtr local(std::string n);
  static ExprPtr star();
  static ExprPtr choice();
  static ExprPtr self();
  static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r);
};

bool expr_equal(const Expr& a, const Expr& b);
bool expr_has_star(const Expr& e);
void expr_locals(const Expr& e, std::set<std::string>& out);
std::string expr_str(const Expr& e);

enum class StmtKind {
  Write,      // global := expr
  Read,       // local := global
  Call,       // local := call method
  Return,
  AwaitVar,   // await local
  AwaitStar,  // await *
  If,
  While,
  Assign,     // local := expr (instrumentation only)
  Assert,     // assert (expr)
};

struct Stmt {
  StmtKind kind = StmtKind::Return;
  StmtId id;
  SourceLoc loc;
  std::string local;
  std::string global;
  std::string callee;
  ExprPtr expr;
  std::vector<Stmt> body;       // then-branch or loop body
  std::vector<Stmt> else_body;
  bool has_else = false;        // an explicit else was written
  bool from_loop = false;       // an `if` obtained by abstracting a loop

  bool is_access() const { return kind == StmtKind::Read || kind == StmtKind::Write; }
  bool is_compound() const { return kind == StmtKind::If || kind == StmtKind::While; }
};

struct MethodDef {
  std::string name;
  bool declared_async = false;
  bool is_async = false;  // declared or containing an await
  bool is_base = true;    // no call statements
  std::vector<Stmt> body;
  SourceLoc loc;
};

struct ProgramAst {
  std::vector<std::string> globals;
  std::vector<MethodDef> methods;
  std::vector<std::string> asyncify;

  const MethodDef* find_method(std::string_view name) const;
  MethodDef* find_method(std::string_view name);
  bool is_global(std::string_view name) const;
  std::set<std::string> lambda() const { return {asyncify.begin(), asyncify.end()}; }
};

// Reassigns statement ids and derived method flags after structural edits.
void finalize(ProgramAst& p);

bool structurally_equal(const ProgramAst& a, const ProgramAst& b);

void for_each_stmt(const std::vector<Stmt>& body, const std::function<void(const Stmt&)>& fn);
void for_each_stmt(const ProgramAst& p, const std::function<void(const MethodDef&, const Stmt&)>& fn);
const Stmt* find_stmt(const ProgramAst& p, const StmtId& id);

// Removes every `await r`. `await *` statements stay: they belong to the
// synchronous program and are ignored by synchronous execution.
ProgramAst erase_await_vars(const ProgramAst& p);

bool has_await_vars(const ProgramAst& p);

// Inserts `stmts` before / after the statement `target` in whatever body holds
// it. Ids are not renumbered, so several edits can be made before finalize().
bool insert_before(ProgramAst& p, const StmtId& target, std::vector<Stmt> stmts);
bool insert_after(ProgramAst& p, const StmtId& target, std::vector<Stmt> stmts);

// Statement constructors for program transformations.
namespace make {
Stmt read(std::string local, std::string global);
Stmt write(std::string global, ExprPtr e);
Stmt assign(std::string local, ExprPtr e);
Stmt assert_that(ExprPtr e);
Stmt ret();
Stmt if_then(ExprPtr cond, std::vector<Stmt> then_body, std::vector<Stmt> else_body = {});
}  // namespace make

}  // namespace asyncsynth
