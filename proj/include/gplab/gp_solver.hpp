#pragma once

#include <optional>

#include "gplab/grid.hpp"
#include "gplab/peak_locator.hpp"
#include "gplab/soliton.hpp"

namespace gplab {

struct PeakCollapse : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PeakMigrationOutOfTube : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CollapseDetected : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BracketInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BallOutsideGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Peak {
  Vec x;
  double height = 0;
};

/// Discrete solution of -eps^2 Lap w + (1 + eps^2 V) w = w^3 in the rescaled
/// amplitude units; lambda = 1/eps^2 is the continuation parameter, mu = -lambda,
/// and mass_a = lambda * int w^2 is the original-variable constraint mass.
struct GPState {
  Grid grid;
  std::vector<double> w;
  double lambda = 0;
  double mass_a = 0;
  std::vector<Peak> peaks;
  double residual_norm = 0;  // ||F||_2 / ||w||_2
  std::vector<double> pohozaev_residuals;
  double epsilon() const { return 1.0 / std::sqrt(lambda); }
};

struct PeakAnsatz {
  struct Entry {
    Vec center;
    double v_local = 0;  // V_i on Gamma
  };
  std::vector<Entry> entries;
  double epsilon = 0.1;
  double min_separation_over_eps() const;
};

/// Superposition of width-eps solitons sqrt(1+eps^2 V_i) Q(sqrt(1+eps^2 V_i)|x-c_i|/eps),
/// cubically interpolated from the radial profile.
GPState build_ansatz(const Grid& grid, const PeakAnsatz& ansatz, const SolitonProfile& profile);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int krylov_max = 500;
  double krylov_rtol = 1e-5;
  const LevelSurface* tube_surface = nullptr;  // optional peak-migration check
  double tube_delta = 0.2;
  int expected_peaks = -1;  // -1: take from the incoming state
};

/// Damped Newton with MINRES inner solves (spectral or Jacobi preconditioner).
GPState newton_solve(GPState state, const Potential& potential, const NewtonOptions& opts = {});

std::vector<Peak> detect_peaks(const GPState& state);

/// Local Pohozaev identity defect on B_radius(center), evaluated in original
/// constrained variables; |LHS-RHS|/(|LHS|+|RHS|).
double local_pohozaev_residual(const GPState& state, const Potential& potential, const Vec& center,
                               double radius);

/// J(u) = int(|grad u|^2 + V u^2) - (a/4) int u^4 on the normalized state.
double state_energy(const GPState& state, const Potential& potential);

struct GroundFlowOptions {
  double dt = 0.02;
  double tol = 1e-12;       // per-step relative change
  long max_steps = 200000;
  double collapse_factor = 50.0;
  std::optional<std::vector<double>> init;  // initial v; default: Gaussian at the V minimum
};

struct GroundFlowResult {
  std::vector<double> v;  // field of the unconstrained form, int v^2 = a_target
  double mu = 0;
  double mass = 0;
  double energy = 0;      // J of the normalized state
  long steps = 0;
  std::optional<GPState> state;  // filled when mu < 0
};

/// Normalized (mass-projected) semi-implicit gradient flow; independent
/// oracle for k = 1 minima. Periodic grids only.
GroundFlowResult ground_state_gradient_flow(const Grid& grid, const Potential& potential,
                                            double a_target, const GroundFlowOptions& opts = {});

/// One flow step (exposed for the energy-descent property).
void ground_flow_step(SpectralWorkspace& sw, const std::vector<double>& vpot, double dt,
                      double a_target, std::vector<double>& v);

double energy_from_v(const Grid& grid, const Potential& potential, const std::vector<double>& v);

struct ContinuationResult {
  GPState state;
  std::vector<std::pair<double, double>> measured_map;  // (lambda, a_lambda)
  bool non_monotone = false;
  int solves = 0;
};

/// Secant/bisection inversion of lambda -> a_lambda to hit a_target; each
/// trial solved by warm-started Newton.
ContinuationResult mass_continuation(const std::vector<PeakAnsatz::Entry>& candidates,
                                     const Potential& potential, const SolitonProfile& profile,
                                     double a_target, std::array<double, 2> lambda_bracket,
                                     const Grid& grid, const NewtonOptions& nopts = {});

/// Mass in original variables: lambda * int w^2.
double state_mass(const Grid& grid, const std::vector<double>& w, double lambda);

}  // namespace gplab
