#pragma once

// JSON scenario documents. See scenarios/scenario.schema.json for the format.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nsbavoid/simulator.hpp"

namespace nsbavoid {

/// Schema violation; field() is a dotted path such as "gains.supervisor.K".
class ScenarioError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Reads and parses a JSON document. Syntax errors become ScenarioError.
nlohmann::json load_json(const std::filesystem::path& path);

/// Builds and validates a scenario. Unknown keys are rejected; every object
/// may carry a free-form "comment" string.
Scenario parse_scenario(const nlohmann::json& doc);

Scenario load_scenario(const std::filesystem::path& path);

/// Path of a bundled scenario file, e.g. bundled_scenario("case1.json").
std::filesystem::path bundled_scenario(const std::string& file_name);

}  // namespace nsbavoid
