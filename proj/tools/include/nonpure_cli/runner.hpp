/// @file runner.hpp
/// @brief Executes scenarios and maps outcomes to exit codes.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "nonpure_cli/report.hpp"
#include "nonpure_cli/scenario.hpp"

namespace nonpure::cli {

enum ExitCode : int { kExitPass = 0, kExitCheckFail = 1, kExitParse = 2, kExitConstructor = 3 };

struct RunOutput {
  Report report;
  /// Extra lines for standard output (the distance of `metric`).
  std::string stdout_extra;
  /// Files to write next to the report, as (name, content).
  std::vector<std::pair<std::string, std::string>> artifacts;
};

/// Runs every check of the scenario at its refinement levels. Throws
/// ParseError for bad keys and ConstructorError for fixtures that cannot be
/// built.
RunOutput run_scenario(const Scenario& s);

struct CommandOptions {
  Kind command = Kind::kValidate;
  std::string scenario_path;
  /// Report directory; nothing is written when empty.
  std::string out_dir;
  std::optional<int> levels;
};

/// Loads, checks the kind against the command, runs, prints the text report
/// to `out`, writes report.txt, report.jsonl and artifacts to the output
/// directory and returns the exit code. Diagnostics go to `err`.
int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace nonpure::cli
