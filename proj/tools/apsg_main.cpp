#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "apsg/scenario.hpp"

namespace {

int cmd_list() {
  for (const auto& info : apsg::check_catalogue())
    std::printf("%-20s %s%s\n", info.id.c_str(), info.summary.c_str(),
                info.exploratory ? "  [exploratory]" : "");
  return 0;
}

int cmd_describe(const std::string& id) {
  for (const auto& info : apsg::check_catalogue()) {
    if (info.id == id) {
      std::printf("%s\n\n%s\n\nChecks: %s\n", info.id.c_str(), info.summary.c_str(),
                  info.statement.c_str());
      if (info.exploratory)
        std::printf("\nExploratory: observations only, never part of the exit status.\n");
      return 0;
    }
  }
  std::fprintf(stderr, "error: unknown check id '%s' (see `apsg list`)\n", id.c_str());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"apsg - C-distribution semigroup construction and almost-periodicity analysis"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out";
  double tol_scale = 1.0;
  int parallel = 1;
  auto* run = app.add_subcommand("run", "run a scenario file and write reports");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory (default: out)");
  run->add_option("--tol-scale", tol_scale, "scale factor applied to all check tolerances");
  run->add_option("--parallel", parallel, "number of concurrent checks");

  auto* list = app.add_subcommand("list", "list the available checks");

  std::string describe_id;
  auto* describe = app.add_subcommand("describe", "print what a check verifies");
  describe->add_option("id", describe_id, "check id")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) return cmd_list();
    if (describe->parsed()) return cmd_describe(describe_id);
    const apsg::Scenario sc = apsg::Scenario::load(scenario_path);
    apsg::RunOptions opts;
    opts.tol_scale = tol_scale;
    opts.parallel = parallel;
    const int status = apsg::run_scenario(sc, out_dir, opts);
    std::printf("%s: %s (report in %s)\n", sc.name.c_str(),
                status == 0 ? "all checks passed" : "FAILURES recorded", out_dir.c_str());
    return status;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
