#pragma once

// Batch front-end: `nsbsim run` and `nsbsim compare`.
//
// Exit codes: 0 success, 1 I/O or usage failure, 2 scenario schema
// violation, 3 non-finite state during integration. Output files are only
// written once the whole run has succeeded.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsbavoid/simulator.hpp"

namespace nsbavoid {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitSchema = 2,
  kExitNonFinite = 3,
};

/// Command-line overrides, kept as the strings the user typed.
struct RunFlags {
  std::filesystem::path scenario;
  std::filesystem::path out = "out";
  std::optional<std::string> supervisor;  // arctan | piecewise | crisp
  std::optional<std::string> controller;  // nsb | apf
  std::optional<std::string> ts;
  std::optional<std::string> duration;
  std::optional<std::string> seed;
  bool quiet = false;
  bool trace = false;
};

/// Applies flag overrides to a scenario document (every robot). Throws
/// ScenarioError for values that cannot be applied.
nlohmann::json apply_overrides(nlohmann::json doc, const RunFlags& flags);

/// {"flags": {...verbatim...}, "scenario": <document after overrides>}
nlohmann::json effective_config(const nlohmann::json& doc, const RunFlags& flags);

nlohmann::json metrics_json(const Metrics& m);

/// gnuplot script rendering path.png, sigma.png and velocity.png from
/// trajectory.csv in the same directory.
std::string plot_script(const Scenario& scenario, const TrajectoryLog& log);

int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err);

/// Controller labels: nsb, nsb-arctan, nsb-piecewise, nsb-crisp, apf.
int cmd_compare(const RunFlags& flags, const std::vector<std::string>& controllers,
                std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nsbavoid
