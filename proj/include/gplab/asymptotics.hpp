#pragma once

#include "gplab/gp_solver.hpp"

namespace gplab {

struct DegenerateLaw : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Drift of one detected peak relative to its certified candidate, split
/// through the candidate frame (normal = signed distance off Gamma).
struct DriftObs {
  double normal = 0;
  double tangential = 0;
  double total = 0;
};

/// One converged rung of a lambda sweep. a_star_ref is the critical mass
/// measured from a V=0 solve on the identical grid/discretization, so that
/// the law numerators compare matched quantities.
struct SweepRecord {
  double lambda = 0;
  double mass_a = 0;
  double a_star_ref = 0;
  double grid_spacing = 0;
  std::vector<Peak> peaks;
  std::vector<DriftObs> drifts;
  std::vector<double> pohozaev_defects;
  double energy = 0;
};

struct AsymptoticReport {
  std::string law_id;
  double predicted_limit = 0;
  std::vector<double> lambdas;
  std::vector<double> ratios;
  std::string verdict;  // PASS | FAIL | INCONCLUSIVE | SKIPPED_DEGENERATE
  double terminal_tolerance = 0;
  std::string detail;
};

/// (k a* - a_lambda) lambda^2 -> (1/2) sum LapV(b_i) * N * B  (N = 2).
AsymptoticReport verify_mu_a_law_2d(const std::vector<SweepRecord>& sweep, double sum_laplV,
                                    const SolitonConstants& constants, int k);

/// a_lambda sqrt(lambda) -> k a*; refined: lambda (k a* - a_lambda sqrt(lambda)) -> sum V_i / 2.
AsymptoticReport verify_mu_a_law_3d(const std::vector<SweepRecord>& sweep, double sum_Vi,
                                    const SolitonConstants& constants, int k);

/// log-log drift slope in [-1.2, -0.8] plus the normal coefficient against
/// -(B/2a*)(dLapV/dnu)(d2V/dnu2)^-1 at the largest lambda.
AsymptoticReport verify_peak_drift(const std::vector<SweepRecord>& sweep,
                                   const PeakCandidate& candidate,
                                   const SolitonConstants& constants);

/// Min pairwise separation over eps must grow along the sweep (clustered runs).
AsymptoticReport verify_separation_growth(const std::vector<SweepRecord>& sweep);

nlohmann::json records_to_json(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> records_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const AsymptoticReport& r);
std::string records_to_csv(const std::vector<SweepRecord>& records);

}  // namespace gplab
