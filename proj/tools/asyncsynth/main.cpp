#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <asyncsynth/multithread.hpp>

#include "report.hpp"

namespace asyncsynth::cli {
namespace {

enum Exit { kOk = 0, kFinding = 1, kUsage = 2, kBudget = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string file;
  bool json = false;
  bool strict = false;
  std::string mode = "precise";
  std::string oracle = "instrumented";
  std::string semantics = "async";
  std::size_t limit = 0;
  std::vector<std::int64_t> domain{0, 1};
  int loop_bound = 2;
  std::size_t max_states = 0;  // 0: default or ASYNCSYNTH_BUDGET
  std::vector<std::string> init;
  bool dump = false;
};

ExplorationConfig make_config(const Options& o) {
  ExplorationConfig cfg;
  cfg.domain = o.domain;
  cfg.loop_bound = o.loop_bound;
  if (const char* env = std::getenv("ASYNCSYNTH_BUDGET")) {
    try {
      cfg.max_states = std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("ASYNCSYNTH_BUDGET is not a number: ") + env);
    }
  }
  if (o.max_states) cfg.max_states = o.max_states;
  for (const auto& kv : o.init) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--init expects NAME=VALUE, got '" + kv + "'");
    try {
      cfg.initial[kv.substr(0, eq)] = std::stoll(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--init value is not an integer: '" + kv + "'");
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parsed program plus well-formedness findings (strict ones included on request).
struct Loaded {
  ProgramAst program;
  std::vector<Violation> violations;
};

Loaded load(const Options& o) {
  Loaded l{parse_program(read_file(o.file)), {}};
  l.violations = check_well_formed(l.program);
  if (o.strict) {
    auto s = strict_findings(l.program);
    l.violations.insert(l.violations.end(), s.begin(), s.end());
  }
  return l;
}

void print_violations(const Options& o, const std::vector<Violation>& vs) {
  for (const auto& v : vs) std::cerr << format_diagnostic(o.file, v.loc, v.code(), v.message) << "\n";
}

// Loads and rejects ill-formed input, which every analysis requires.
std::optional<ProgramAst> load_well_formed(const Options& o) {
  auto l = load(o);
  if (l.violations.empty()) return std::move(l.program);
  print_violations(o, l.violations);
  return std::nullopt;
}

void warn_truncated(bool truncated, const ExplorationConfig& cfg) {
  if (truncated)
    std::cerr << "warning: some loop reached the bound of " << cfg.loop_bound << " iterations; results are bounded\n";
}

Asynchronization starting_point(const ProgramAst& p) {
  return has_await_vars(p) ? asynchronization_of(p) : weakest_async(p);
}

// ---------------------------------------------------------------- commands

int cmd_parse(const Options& o) {
  auto l = load(o);
  if (o.json) {
    json vs = json::array();
    for (const auto& v : l.violations) vs.push_back(violation_json(v));
    std::cout << json{{"ok", l.violations.empty()}, {"violations", vs}, {"program", pretty_print(l.program)}}.dump(2)
              << "\n";
  } else {
    print_violations(o, l.violations);
    if (l.violations.empty()) std::cout << pretty_print(l.program);
  }
  return l.violations.empty() ? kOk : kFinding;
}

int cmd_run(const Options& o) {
  auto p = load_well_formed(o);
  if (!p) return kFinding;
  auto cfg = make_config(o);
  struct Visitor : ExploreVisitor {
    const Options& o;
    std::set<std::vector<std::int64_t>> finals;
    std::size_t count = 0;
    bool truncated = false;
    explicit Visitor(const Options& opt) : o(opt) {}
    bool complete(const Execution& e) override {
      if (o.dump)
        for (const auto& a : e.actions) {
          json j = action_json(e, a);
          j["exec"] = count;
          std::cout << j.dump() << "\n";
        }
      ++count;
      finals.insert(e.globals);
      truncated = truncated || e.truncated;
      return true;
    }
  } v(o);
  std::vector<std::string> globals;
  if (o.semantics == "threads") {
    ThreadInterpreter in(*p, cfg);
    in.explore(v);
    globals = in.index().globals;
  } else {
    Interpreter in(*p, cfg, o.semantics == "sync" ? RunMode::Synchronous : RunMode::Async);
    in.explore(v);
    globals = in.index().globals;
  }
  warn_truncated(v.truncated, cfg);
  if (o.dump) return kOk;
  if (o.json) {
    json fs = json::array();
    for (const auto& g : v.finals) {
      json j = json::object();
      for (std::size_t i = 0; i < g.size(); ++i) j[globals[i]] = g[i];
      fs.push_back(j);
    }
    std::cout << json{{"executions", v.count}, {"finals", fs}, {"truncated", v.truncated}}.dump(2) << "\n";
  } else {
    std::cout << v.count << " executions, " << v.finals.size() << " final valuations\n";
    for (const auto& g : v.finals) {
      for (std::size_t i = 0; i < g.size(); ++i) std::cout << (i ? " " : "") << globals[i] << "=" << g[i];
      std::cout << "\n";
    }
  }
  return kOk;
}

int cmd_races(const Options& o, Semantics sem) {
  auto p = load_well_formed(o);
  if (!p) return kFinding;
  auto cfg = make_config(o);
  auto rs = sem == Semantics::Threads ? mt_find_races(*p, cfg) : find_data_races(*p, cfg);
  warn_truncated(rs.truncated, cfg);
  if (o.json) {
    json arr = json::array();
    for (const auto& d : rs.races) arr.push_back(race_json(d));
    std::cout << arr.dump(2) << "\n";
  } else {
    for (const auto& d : rs.races)
      std::cout << "race on " << d.var << ": " << d.first_stmt.str() << " and " << d.second_stmt.str()
                << " (root cause " << d.cause.call.str() << " before " << d.cause.anchor.str() << ")\n";
    std::cout << rs.races.size() << (rs.races.size() == 1 ? " race\n" : " races\n");
  }
  return rs.races.empty() ? kOk : kFinding;
}

int cmd_weakest(const Options& o) {
  auto p = load_well_formed(o);
  if (!p) return kFinding;
  auto w = weakest_async(erase_await_vars(*p));
  if (o.json) std::cout << async_json(w).dump(2) << "\n";
  else std::cout << "distance " << vector_text(distance_vector(w)) << "\n" << pretty_print(w.program());
  return kOk;
}

int cmd_maxrel(const Options& o, Semantics sem) {
  auto p = load_well_formed(o);
  if (!p) return kFinding;
  auto cfg = make_config(o);
  Asynchronization start = starting_point(*p);
  MaxRelResult r{start, {}, false};
  std::size_t calls = 0;
  if (o.mode == "dataflow") {
    auto abs = to_abstract(start);
    r = maxrel_sharp(abs, &calls, sem);
    r.result = to_concrete(r.result, start.shared_space());
  } else {
    RepairOptions opt;
    opt.cfg = cfg;
    opt.oracle = o.oracle == "explore" ? RaceOracle::Explore : RaceOracle::Instrumented;
    opt.semantics = sem;
    RepairEngine engine(start.shared_space(), opt);
    r = engine.maxrel(start);
    calls = engine.counters().oracle_calls;
  }
  warn_truncated(r.truncated, cfg);
  if (o.json) {
    std::cout << maxrel_json(r, calls).dump(2) << "\n";
  } else {
    std::cout << pretty_print(r.result.program());
    std::cout << "distance " << vector_text(distance_vector(r.result)) << "\n";
    for (std::size_t i = 0; i < r.steps.size(); ++i)
      std::cout << "repair " << i + 1 << ": await of " << r.steps[i].race.cause.call.str() << " moved before "
                << r.steps[i].race.cause.anchor.str() << "\n";
    std::cout << "iterations " << r.steps.size() << ", " << (o.mode == "dataflow" ? "summary operations " : "oracle calls ")
              << calls << "\n";
  }
  return kOk;
}

int cmd_summaries(const Options& o) {
  auto p = load_well_formed(o);
  if (!p) return kFinding;
  ProgramAst q = abstract_program(starting_point(*p).program());
  auto rw = rw_var(q);
  auto crw = crw_var(q, rw);
  json j = summary_json(q, rw, crw);
  if (o.json) {
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  auto names = [](const json& a) {
    std::string s;
    for (const auto& x : a) s += (s.empty() ? "" : ",") + x.get<std::string>();
    return "{" + s + "}";
  };
  for (const auto& m : q.methods) {
    const auto& e = j["methods"][m.name];
    std::cout << m.name << ": R=" << names(e["rw"]["reads"]) << " W=" << names(e["rw"]["writes"])
              << " CR=" << names(e["crw"]["reads"]) << " CW=" << names(e["crw"]["writes"]) << "\n";
  }
  return kOk;
}

int cmd_enumerate(const Options& o, Semantics sem) {
  auto p = load_well_formed(o);
  if (!p) return kFinding;
  auto cfg = make_config(o);
  EnumOptions opt;
  opt.mode = o.mode == "dataflow" ? EnumMode::Dataflow : EnumMode::Precise;
  opt.limit = o.limit;
  opt.repair.cfg = cfg;
  opt.repair.oracle = o.oracle == "explore" ? RaceOracle::Explore : RaceOracle::Instrumented;
  opt.repair.semantics = sem;
  std::size_t n = 0;
  opt.on_output = [&](const EnumOutput& out) {
    if (o.json) {
      std::cout << enum_record_json(n, out).dump() << "\n";
    } else {
      std::cout << "# " << n << " distance " << vector_text(distance_vector(out.async))
                << " oracle_calls=" << out.oracle_calls << " predecessors=" << out.predecessors << "\n"
                << pretty_print(out.async.program());
    }
    std::cout.flush();
    ++n;
  };
  auto run = asy_syn(erase_await_vars(*p), opt);
  warn_truncated(run.truncated, cfg);
  if (!o.json) std::cout << run.outputs.size() << " asynchronizations" << (run.partial ? " (limit reached)" : "") << "\n";
  if (run.duplicates) {
    std::cerr << "error: the enumeration produced some asynchronization twice\n";
    return kFinding;
  }
  return kOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("file", o.file, "Program source (.tal)")->required();
  sub->add_flag("--json", o.json, "Machine-readable output");
  sub->add_flag("--strict", o.strict, "Also report conditionals without an else branch");
  sub->add_option("--domain", o.domain, "Values of `*`")->delimiter(',')->expected(1, 64);
  sub->add_option("--loop-bound", o.loop_bound, "Iterations explored per loop entry")->check(CLI::PositiveNumber);
  sub->add_option("--max-states", o.max_states, "Exploration budget (overrides ASYNCSYNTH_BUDGET)");
  sub->add_option("--init", o.init, "Initial global value NAME=VALUE (default 0)");
}

void add_repair(CLI::App* sub, Options& o) {
  sub->add_option("--mode", o.mode, "Race reasoning")->check(CLI::IsMember({"precise", "dataflow"}));
  sub->add_option("--oracle", o.oracle, "Precise race oracle")->check(CLI::IsMember({"instrumented", "explore"}));
}

}  // namespace
}  // namespace asyncsynth::cli

int main(int argc, char** argv) {
  using namespace asyncsynth;
  using namespace asyncsynth::cli;
  CLI::App app{"Synthesize sound async/await placements for sequential programs"};
  app.require_subcommand(1);
  Options o;
  std::function<int()> action;

  auto sub = [&](const char* name, const char* help, std::function<int()> f) {
    auto* s = app.add_subcommand(name, help);
    add_common(s, o);
    s->callback([&action, f] { action = f; });
    return s;
  };
  sub("parse", "Parse and check well-formedness", [&] { return cmd_parse(o); });
  sub("run", "Explore executions and report final valuations", [&] { return cmd_run(o); })
      ->add_option("--semantics", o.semantics, "Execution semantics")
      ->check(CLI::IsMember({"async", "sync", "threads"}));
  app.get_subcommand("run")->add_flag("--dump", o.dump, "Print every action as a JSON line");
  sub("races", "Report data races", [&] { return cmd_races(o, Semantics::Async); });
  sub("weakest", "Print the weakest asynchronization", [&] { return cmd_weakest(o); });
  add_repair(sub("maxrel", "Maximal sound asynchronization below the input", [&] { return cmd_maxrel(o, Semantics::Async); }), o);
  sub("summaries", "Read/write and concurrent read/write summaries", [&] { return cmd_summaries(o); });
  auto* en = sub("enumerate", "Enumerate all sound asynchronizations", [&] { return cmd_enumerate(o, Semantics::Async); });
  add_repair(en, o);
  en->add_option("--limit", o.limit, "Stop after N outputs (0: all)");
  sub("mt-races", "Report data races under start/join threads", [&] { return cmd_races(o, Semantics::Threads); });
  add_repair(sub("mt-maxrel", "Maximal sound start/join refactoring below the input",
                 [&] { return cmd_maxrel(o, Semantics::Threads); }),
             o);
  auto* men = sub("mt-enumerate", "Enumerate all sound start/join refactorings",
                  [&] { return cmd_enumerate(o, Semantics::Threads); });
  add_repair(men, o);
  men->add_option("--limit", o.limit, "Stop after N outputs (0: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StateBudgetExceeded || e.code() == ErrorCode::SpaceBudgetExceeded) {
      std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
      return kBudget;
    }
    if (e.loc().line > 0) std::cerr << format_diagnostic(o.file, e.loc(), error_code_name(e.code()), e.what()) << "\n";
    else std::cerr << o.file << ": " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return kUsage;
  }
}
