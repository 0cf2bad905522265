#include "report.hpp"

namespace asyncsynth::cli {

std::string vector_text(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

json violation_json(const Violation& v) {
  json stmts = json::array();
  for (const auto& s : v.stmts) stmts.push_back(s.str());
  return {{"code", v.code()},   {"condition", v.condition()}, {"method", v.method},
          {"line", v.loc.line}, {"col", v.loc.col},           {"message", v.message},
          {"stmts", stmts}};
}

json action_json(const Execution& e, const Action& a) {
  json j{{"act", a.id}, {"task", a.task}, {"event", event_kind_name(a.kind)}};
  j["stmt"] = a.stmt >= 0 ? json(e.index->stmts[a.stmt].str()) : json(nullptr);
  if (a.is_access()) j["var"] = e.index->globals[a.var];
  if (a.kind == EventKind::Call || a.kind == EventKind::Await) j["target"] = a.target;
  return j;
}

json execution_json(const Execution& e) {
  json acts = json::array();
  for (const auto& a : e.actions) acts.push_back(action_json(e, a));
  json g = json::object();
  for (std::size_t i = 0; i < e.globals.size(); ++i) g[e.index->globals[i]] = e.globals[i];
  return {{"actions", acts}, {"globals", g}, {"truncated", e.truncated}};
}

json race_json(const DataRace& d) {
  return {{"var", d.var},
          {"first_stmt", d.first_stmt.str()},
          {"second_stmt", d.second_stmt.str()},
          {"root_cause", {{"call", d.cause.call.str()}, {"anchor", d.cause.anchor.str()}}},
          {"witness_execution", execution_json(d.witness)}};
}

json async_json(const Asynchronization& a) {
  json pl = json::object();
  for (const auto& [call, awaits] : a.placement()) {
    json arr = json::array();
    for (const auto& w : awaits) arr.push_back(w.str());
    pl[call.str()] = arr;
  }
  return {{"program", pretty_print(a.program())}, {"distance_vector", distance_vector(a)}, {"placement", pl}};
}

json maxrel_json(const MaxRelResult& r, std::size_t oracle_calls) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    json j{{"call", s.race.cause.call.str()}, {"anchor", s.race.cause.anchor.str()}, {"moved", s.moved}};
    if (!s.race.first.method.empty()) j["race"] = {s.race.first.str(), s.race.second.str()};
    steps.push_back(j);
  }
  json out = async_json(r.result);
  out["repairs"] = steps;
  out["iterations"] = r.steps.size();
  out["oracle_calls"] = oracle_calls;
  out["truncated"] = r.truncated;
  return out;
}

json enum_record_json(std::size_t index, const EnumOutput& o) {
  json j = async_json(o.async);
  j["index"] = index;
  j["metrics"] = {{"oracle_calls", o.oracle_calls},
                  {"predecessors", o.predecessors},
                  {"work", o.oracle_calls + o.predecessors}};
  return j;
}

namespace {

json access_json(const AccessSummary& a) {
  return {{"reads", a.reads}, {"writes", a.writes}};
}

}  // namespace

json summary_json(const ProgramAst& program, const RwSummaries& rw, const std::map<std::string, AccessSummary>& crw) {
  json methods = json::object();
  for (const auto& m : program.methods) {
    json j{{"rw", access_json(rw.method.at(m.name))}, {"crw", access_json(crw.at(m.name))}};
    methods[m.name] = j;
  }
  json stmts = json::object();
  for (const auto& [id, a] : rw.stmt) stmts[id.str()] = access_json(a);
  return {{"methods", methods}, {"statements", stmts}};
}

}  // namespace asyncsynth::cli
