#pragma once

#include <optional>

#include "gplab/asymptotics.hpp"

namespace gplab {

/// Lambda-ladder experiment: one converged solve per rung plus a matched
/// V=0 reference solve on the identical grid for the critical-mass baseline.
struct SweepConfig {
  int dim = 2;
  nlohmann::json potential_spec;
  std::optional<LevelSurface> surface;
  std::vector<PeakCandidate> candidates;
  std::vector<double> lambda_ladder;
  int grid_n = 512;
  Boundary bc = Boundary::Periodic;
  std::string mode = "newton";  // newton | cluster
  int cluster_k = 2;
  double cluster_theta = 4.0;
  double pohozaev_radius = 0.3;
  int jobs = 1;
  NewtonOptions newton;
  const SolitonProfile* profile = nullptr;
};

std::vector<SweepRecord> run_sweep(const SweepConfig& config);

/// Single rung of the sweep (exposed for the discretization-robustness checks).
SweepRecord run_sweep_rung(const SweepConfig& config, double lambda);

}  // namespace gplab
