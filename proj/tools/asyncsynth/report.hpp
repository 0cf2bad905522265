#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include <asyncsynth/dataflow.hpp>
#include <asyncsynth/enumerate.hpp>
#include <asyncsynth/frontend.hpp>
#include <asyncsynth/repair.hpp>
#include <asyncsynth/traces.hpp>

namespace asyncsynth::cli {

using nlohmann::json;

std::string vector_text(const std::vector<int>& v);

json violation_json(const Violation& v);
json action_json(const Execution& e, const Action& a);
json execution_json(const Execution& e);
json race_json(const DataRace& d);
json async_json(const Asynchronization& a);
json maxrel_json(const MaxRelResult& r, std::size_t oracle_calls);
json enum_record_json(std::size_t index, const EnumOutput& o);
json summary_json(const ProgramAst& program, const RwSummaries& rw, const std::map<std::string, AccessSummary>& crw);

}  // namespace asyncsynth::cli
