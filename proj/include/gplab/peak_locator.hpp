#pragma once

#include "gplab/soliton.hpp"
#include "gplab/surface.hpp"

namespace gplab {

struct ZeroNormalCurvatureOfV : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Candidate concentration point on Gamma with its certificates.
struct PeakCandidate {
  Vec b;
  FramedSurfacePoint frame;
  double v_at_b = 0;
  double laplV_at_b = 0;
  Vec tangential_grad_laplV;
  bool admissible = false;

  double witness_d2V_dnu2 = 0;       // |d^2 V / d nu^2|
  double witness_det_hess_tau = 0;   // |det tangential Hessian of Lap V|
  bool nondegenerate = false;

  Mat uniqueness_matrix;             // Hess_tau(LapV) + (dLapV/dnu) diag(kappa)
  double uniqueness_det = 0;

  double dlaplV_dnu = 0;
  double d2V_dnu2 = 0;
  double drift_coefficient_normal = 0;  // signed normal displacement per eps^2
  double lagrange_multiplier = 0;
};

struct LocatorOptions {
  double newton_tol = 1e-12;
  int max_iter = 60;
  double dedup_distance = 1e-6;
  std::uint64_t frame_seed = 0;
};

/// Newton (least-squares step, so degenerate rotational continua stay put)
/// on {F(x) = 0, grad LapV(x) - lambda grad F(x) = 0} from every seed;
/// converged roots are deduplicated, sorted and certified. Non-convergent
/// seeds are dropped (count reported via dropped_seeds if non-null).
std::vector<PeakCandidate> find_surface_critical_points(const LevelSurface& surface,
                                                        const Potential& potential,
                                                        const std::vector<Vec>& seeds,
                                                        const LocatorOptions& opts = {},
                                                        int* dropped_seeds = nullptr);

/// Fills the two nondegeneracy witnesses of the candidate (normal curvature
/// of V and det of the tangential Hessian of Lap V) and sets the flag.
PeakCandidate& certify_nondegeneracy(const LevelSurface& surface, const Potential& potential,
                                     PeakCandidate& candidate);

/// Local-uniqueness matrix Hess_tau(LapV) + (dLapV/dnu) diag(kappa).
PeakCandidate& fill_uniqueness_matrix(const LevelSurface& surface, const Potential& potential,
                                      PeakCandidate& candidate);

/// Predicted peak displacement -(B/2a*) (dLapV/dnu) (d2V/dnu2)^-1 eps^2 nu.
/// Only the normal component is predicted; the tangential order is not
/// resolved by the asymptotics this implements.
Vec predict_drift(const PeakCandidate& candidate, double epsilon, const SolitonConstants& constants);

nlohmann::json candidates_to_json(const std::vector<PeakCandidate>& candidates);
std::vector<PeakCandidate> candidates_from_json(const nlohmann::json& j);

}  // namespace gplab
