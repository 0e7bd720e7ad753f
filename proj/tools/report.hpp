#pragma once

// JSON report assembly for the command-line front-end. Field names are
// snake_case and stable; numbers are serialized in shortest round-trip
// form. Reports are deterministic for identical inputs apart from the
// runtime_seconds field.

#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "seplrt/data.hpp"
#include "seplrt/fit_alt.hpp"
#include "seplrt/fit_null.hpp"
#include "seplrt/lrt.hpp"
#include "seplrt/simulate.hpp"

namespace seplrt::report {

using json = nlohmann::ordered_json;

json input_digest(const Dataset& dataset, const std::string& path);
json fit_block(const NullFitResult& fit);
json fit_block(const AltFitResult& fit);
json test_block(const LrtResult& result);
json simulation_block(const SimConfig& config, const SimResult& result, bool include_rep_log);
json error_block(const std::string& kind, const std::string& message);

// Shared skeleton: command echo, version, then blocks are appended by the
// caller; warnings and runtime go last.
json skeleton(const std::string& command);
void finish(json& report, const std::vector<std::string>& warnings, double runtime_seconds);

}  // namespace seplrt::report
