#pragma once

#include <iosfwd>
#include <memory>

#include "liouville/config.hpp"
#include "liouville/diagnostics.hpp"
#include "liouville/limit.hpp"

namespace liouville {

/// A fully built scenario: mesh, operators, desingularized data and the
/// derived invariants. Owns everything the solver layers reference.
struct Scenario {
  ScenarioConfig cfg;
  TriangleMesh mesh;
  FemOperators fem;
  std::unique_ptr<NeumannSolver> lap;
  SingularStructure sing;
  CurvatureData data;
  double chi = 0.0;
  double tau = 0.0;
  SurfaceClass classification = SurfaceClass::nonpositive;
  double lambda = 0.0;

  SolveOptions solve_options() const;
};

Scenario build_scenario(const ScenarioConfig& cfg);

/// Subcommand drivers. Each writes its artifacts under out_dir and prints a
/// short summary to `out`. `threads` bounds sweep parallelism.
int run_info(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out);
int run_solve(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out,
              uint64_t seed);
int run_sweep(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out,
              uint64_t seed, int threads);
int run_bubbles(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out);
int run_limit(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out);
int run_probe(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out);

/// The version string recorded in every output header.
const char* tool_version();

}  // namespace liouville
