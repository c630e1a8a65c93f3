#include <CLI11.hpp>
#include <iostream>

#include "nonpure_cli/runner.hpp"

int main(int argc, char** argv) {
  using namespace nonpure::cli;
  CLI::App app{"Residual and convergence checks for nonpure maps"};
  app.require_subcommand(1);

  CommandOptions options;
  int levels = 0;
  const Kind kinds[] = {Kind::kValidate, Kind::kEvolve,  Kind::kStokes,
                        Kind::kNcStokes, Kind::kMetric, Kind::kIdentitySuite};
  for (Kind kind : kinds) {
    CLI::App* sub = app.add_subcommand(std::string(kind_name(kind)));
    sub->add_option("--scenario", options.scenario_path, "scenario file")->required();
    sub->add_option("--out", options.out_dir, "directory for report.txt and report.jsonl");
    sub->add_option("--levels", levels, "refinement levels, overrides the scenario");
    sub->callback([&options, kind] { options.command = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }
  if (levels != 0) options.levels = levels;
  return run_command(options, std::cout, std::cerr);
}
