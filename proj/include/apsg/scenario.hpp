#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apsg/verify.hpp"

namespace apsg {

/// A reproducible experiment description read from a JSON file. Every run is
/// fully determined by (scenario, seed).
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  FamilyKind kind = FamilyKind::semigroup;
  int order = 1;
  OperatorPair pair;
  double horizon = 0.0;  // derived from the spectrum when absent
  double step = 0.0;
  std::vector<double> freq_grid;
  std::vector<double> epsilons;
  SubspaceSpec subspace = SubspaceSpec::named(SubspaceSpec::Tag::spanD);
  std::vector<std::string> checks;
  std::vector<Vec> orbits;
  std::map<std::string, double> tolerance_overrides;

  static Scenario load(const std::filesystem::path& file);
  static Scenario from_json_text(const std::string& text, const std::string& origin);
};

struct RunOptions {
  double tol_scale = 1.0;
  int parallel = 1;
};

/// Executes the scenario: runs the selected checks, analyzes the requested
/// orbits, and writes report.json, trajectories/*.csv, spectrum.csv and
/// periods.csv into the output directory. Returns the process exit status:
/// 0 iff every non-exploratory check passes.
int run_scenario(const Scenario& sc, const std::filesystem::path& outdir,
                 const RunOptions& opts = {});

}  // namespace apsg
