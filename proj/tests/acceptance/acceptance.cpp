// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <array>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <asyncsynth/dataflow.hpp>
#include <asyncsynth/enumerate.hpp>
#include <asyncsynth/frontend.hpp>
#include <asyncsynth/multithread.hpp>

#include "oracles.hpp"
#include "random_programs.hpp"

using namespace asyncsynth;
using namespace asyncsynth::testing;

namespace {

using Vec = std::vector<int>;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

ProgramAst corpus(const std::string& name) { return parse_program(read_text(corpus_path(name))); }
StmtId id(const char* s) { return StmtId::parse(s); }

std::string show(const Vec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Runs the CLI and returns its stdout; `status` gets the exit code.
std::string run_cli(const std::string& args, int& status) {
  std::string cmd = std::string(ASYNCSYNTH_CLI) + " " + args + " 2>/dev/null";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) throw std::runtime_error("cannot start " + cmd);
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe.get())) out.append(buf.data(), n);
  int raw = pclose(pipe.release());
  status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

Outcome lattice_reproduction() {
  auto t0 = Clock::now();
  const std::string file = corpus_path("rdfile_sync");
  int st = 0;
  std::istringstream lines(run_cli("enumerate --json --mode precise " + file, st));
  if (st != 0) return {false, "enumerate exited with " + std::to_string(st)};
  std::multiset<Vec> got;
  for (std::string line; std::getline(lines, line);)
    if (!line.empty()) got.insert(nlohmann::json::parse(line).at("distance_vector").get<Vec>());
  std::string w = run_cli("weakest --json " + file, st);
  if (st != 0) return {false, "weakest exited with " + std::to_string(st)};
  Vec weakest = nlohmann::json::parse(w).at("distance_vector").get<Vec>();
  double secs = seconds_since(t0);

  std::ostringstream d;
  d << "outputs";
  for (const auto& v : got) d << " " << show(v);
  d << "; weakest " << show(weakest) << "; " << secs << " s";
  bool ok = got == std::multiset<Vec>{{1, 1}, {1, 0}, {0, 1}, {0, 0}} && weakest == Vec{2, 1} && secs < 5.0;
  return {ok, d.str()};
}

Outcome well_formedness_triple() {
  auto conditions = [](const char* name) {
    std::set<int> out;
    for (const auto& v : check_well_formed(corpus(name))) out.insert(v.condition());
    return out;
  };
  auto a = conditions("wf_await_after_loop"), b = conditions("wf_await_in_branch"), c = conditions("wf_nested_loop_ok");
  auto fmt = [](const std::set<int>& s) {
    if (s.empty()) return std::string("pass");
    std::string r = "violates";
    for (int x : s) r += " " + std::to_string(x);
    return r;
  };
  return {a == std::set<int>{2} && b == std::set<int>{3} && c.empty(), fmt(a) + " / " + fmt(b) + " / " + fmt(c)};
}

Outcome race_witnesses() {
  RaceSearch racy = find_data_races(corpus("increment_racy"), {});
  RaceSearch sound = find_data_races(corpus("increment_sound"), {});
  bool ok = racy.races.size() == 1 && sound.races.empty();
  std::string d = std::to_string(racy.races.size()) + " race(s) vs " + std::to_string(sound.races.size());
  if (!racy.races.empty()) {
    const DataRace& r = racy.races[0];
    ok = ok && r.var == "x" && r.first_stmt == id("m1:2") && r.second_stmt == id("Main:1");
    d += "; on " + r.var + " between " + r.first_stmt.str() + " and " + r.second_stmt.str();
  }
  return {ok, d};
}

Outcome branch_repair() {
  auto w = weakest_async(corpus("branch_repair"));
  RcResult rc = rc_min_drace(w);
  if (!rc.race) return {false, "no race found"};
  Asynchronization fixed = repair_data_race(w, rc.race->cause);
  bool same = pretty_print(fixed.program()) == pretty_print(corpus("branch_repair_expected"));
  return {same, "root cause (" + rc.race->cause.call.str() + ", " + rc.race->cause.anchor.str() + ")" +
                    (same ? ", matches the expected program" : ", differs from the expected program")};
}

Outcome precise_vs_dataflow() {
  auto a = asynchronization_of(corpus("guarded_write"));
  Asynchronization precise = maxrel(a).result;
  Asynchronization sharp = to_concrete(maxrel_sharp(to_abstract(a)).result, a.shared_space());
  Vec in = distance_vector(a), vp = distance_vector(precise), vs = distance_vector(sharp);
  bool clean = find_data_races(precise.program(), {}).races.empty() && find_data_races(sharp.program(), {}).races.empty();
  // The third call's await is the one next to the write of y.
  bool ok = clean && vp[2] == in[2] && vs[2] < in[2];
  return {ok, "input " + show(in) + ", precise " + show(vp) + ", dataflow " + show(vs) +
                  (clean ? ", both race-free" : ", race found")};
}

struct RandomCheck {
  std::size_t programs = 0;
  std::size_t not_unique = 0;     // criterion 6
  std::size_t enum_mismatch = 0;  // criterion 7
  std::size_t outputs = 0;
  std::size_t final_mismatch = 0;  // criterion 8
  double secs = 0;
};

// One brute-force pass per program feeds criteria 6 to 8.
RandomCheck random_corpus_check(std::size_t n) {
  RandomCheck rc;
  auto t0 = Clock::now();
  std::uint64_t seed = 1;
  std::vector<ProgramAst> programs;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t used = 0;
    programs.push_back(random_program(seed, {}, &used));
    seed = used + 1;
  }
  for (const char* name : {"rdfile_sync", "two_threads", "guarded_write", "branch_repair", "sleep_right",
                           "read_then_increment", "wf_nested_loop_ok", "loop_order"})
    programs.push_back(erase_await_vars(corpus(name)));

  for (const auto& p : programs) {
    ++rc.programs;
    auto sp = std::make_shared<const AsyncSpace>(p);
    BruteForce bf = brute_force(p, {});
    auto w = weakest_async(sp);
    auto best = bf.max_sound_below(w.covered());
    if (!best || *best != maxrel(w).result.covered()) ++rc.not_unique;

    EnumerationRun run = asy_syn(p);
    std::set<Bits> got;
    for (const auto& o : run.outputs) got.insert(o.async.covered());
    if (run.duplicates || got.size() != run.outputs.size() || got != bf.sound_set()) ++rc.enum_mismatch;

    auto sync = run_synchronous(p, {}).finals;
    for (const auto& o : run.outputs) {
      ++rc.outputs;
      if (final_valuations(o.async.program(), {}) != sync) ++rc.final_mismatch;
    }
  }
  rc.secs = seconds_since(t0);
  return rc;
}

Outcome multithreaded() {
  ProgramAst p = corpus("start_join");
  RaceSearch mt = mt_find_races(p, {});
  bool mt_race = false;
  for (const auto& r : mt.races) mt_race |= r.var == "x" && r.second_stmt == id("Main:1");
  bool async_clean = find_data_races(p, {}).races.empty();

  auto a = asynchronization_of(p);
  MtRefactoring fixed = mt_repair(a, {id("Main:0"), id("Main:1")});
  // The join of the call at Main:0 now sits right before `x := 2`.
  bool moved = fixed.placement().at(id("Main:0")) == std::vector<StmtId>{id("Main:1~0")} && mt_sound(fixed);

  GenOptions opt;
  opt.max_calls = 3;
  opt.cap_semantics = Semantics::Threads;
  std::size_t programs = 0, broken = 0;
  std::uint64_t seed = 1;
  for (int i = 0; i < 200; ++i) {
    std::uint64_t used = 0;
    ProgramAst q = random_program(seed, opt, &used);
    seed = used + 1;
    ++programs;
    BruteForce bf = brute_force(q, {}, Semantics::Threads);
    auto sound = bf.sound_set();
    bool closed = true;
    for (const auto& s : sound)
      for (const auto& b : bf.all)
        if (subset(b.covered(), s) && !sound.count(b.covered())) closed = false;
    broken += !closed;
  }
  std::ostringstream d;
  d << "thread race on x " << (mt_race ? "found" : "missing") << ", async race " << (async_clean ? "absent" : "present")
    << ", join " << (moved ? "moved before x := 2" : "not moved") << "; downward closure broken in " << broken << "/"
    << programs;
  return {mt_race && async_clean && moved && broken == 0, d.str()};
}

// Per k: k calls, each followed by an unrelated write and a write the callee
// conflicts with.
std::string straight_line(int k) {
  std::string s = "globals x";
  for (int i = 1; i <= k; ++i) s += ", z" + std::to_string(i);
  s += ";\nasyncify io;\nmethod Main {\n";
  for (int i = 1; i <= k; ++i) {
    auto n = std::to_string(i);
    s += "  t" + n + " := call io;\n  z" + n + " := 1;\n  x := " + n + ";\n";
  }
  return s + "}\nmethod io {\n  await *;\n  x := 0;\n}\n";
}

Outcome delay_trend() {
  std::vector<double> ks, work;
  for (int k = 2; k <= 8; ++k) {
    EnumOptions opt;
    opt.mode = EnumMode::Dataflow;
    EnumerationRun run = asy_syn(parse_program(straight_line(k)), opt);
    std::size_t worst = 0;
    for (const auto& row : delay_report(run)) worst = std::max(worst, row.work());
    ks.push_back(k);
    work.push_back(static_cast<double>(worst));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(ks.size());
  Eigen::MatrixXd A(n, 4);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < 4; ++d) A(i, d) = std::pow(ks[i], d);
    y(i) = work[i];
  }
  Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  double ss_res = (A * coef - y).squaredNorm();
  double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  double r2 = ss_tot == 0 ? (ss_res < 1e-9 ? 1.0 : 0.0) : 1.0 - ss_res / ss_tot;
  std::ostringstream d;
  d << "max work per output for k=2..8:";
  for (double w : work) d << " " << w;
  d << "; cubic fit R^2 = " << r2;
  return {r2 >= 0.95, d.str()};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const char* title, const std::function<Outcome()>& f) {
    Outcome o;
    auto t0 = Clock::now();
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << n << ". " << title << ": " << o.detail << " [" << seconds_since(t0)
              << " s]" << std::endl;
  };

  report(1, "lattice reproduction", lattice_reproduction);
  report(2, "well-formedness triple", well_formedness_triple);
  report(3, "race witnesses", race_witnesses);
  report(4, "branch repair", branch_repair);
  report(5, "precise vs dataflow", precise_vs_dataflow);

  RandomCheck rc;
  std::string random_error;
  try {
    rc = random_corpus_check(200);
  } catch (const std::exception& e) {
    random_error = std::string("exception: ") + e.what();
  }
  auto random_outcome = [&](std::size_t bad, const std::string& what) -> Outcome {
    if (!random_error.empty()) return {false, random_error};
    std::ostringstream d;
    d << bad << " counterexamples " << what << " (" << rc.programs << " programs, shared pass " << rc.secs << " s)";
    return {bad == 0 && rc.programs >= 200, d.str()};
  };
  report(6, "uniqueness oracle", [&] { return random_outcome(rc.not_unique, "to maxrel being the unique maximum"); });
  report(7, "enumeration completeness", [&] { return random_outcome(rc.enum_mismatch, "to output set = sound set"); });
  report(8, "final-valuation equivalence", [&] {
    return random_outcome(rc.final_mismatch, "over " + std::to_string(rc.outputs) + " sound outputs");
  });
  report(9, "start/join refactoring", multithreaded);
  report(10, "delay trend", delay_trend);

  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
