#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gplab {

struct BracketNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UncertifiedProfile : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GridMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integrals of the solitary wave used all over the lab:
/// a_star = int Q^2, B = (1/N) int |x|^2 Q^2, q4 = int Q^4, grad2 = int |grad Q|^2.
struct SolitonConstants {
  double a_star = 0;
  double B = 0;
  double q4 = 0;
  double grad2 = 0;
};

/// Scalar samples on the radial grid of the profile they were built from.
struct RadialField {
  std::vector<double> values;
  std::uint64_t grid_tag = 0;
};

/// Positive radial solution of -Q'' - (N-1)/r Q' + Q = Q^3 on a uniform
/// r-grid, with the far field replaced by the exact linear-decay solution
/// (c*K0(r) in 2-D, c*exp(-r)/r in 3-D) beyond tail_switch_r.
struct SolitonProfile {
  int dim = 2;
  double spacing = 0;
  std::vector<double> radial_grid;
  std::vector<double> values;
  std::vector<double> derivative_values;
  double tail_rate = 1.0;
  double tail_amplitude = 0;
  double tail_switch_r = 0;
  double tolerance = 0;
  double ode_residual = 0;   // certification: max-norm ODE defect on the grid
  double shoot_center = 0;   // Q(0) found by shooting
  SolitonConstants constants;
  bool certified = false;
  std::string provenance;

  std::uint64_t grid_tag() const;
  void require_certified() const;
  RadialField make_field(std::vector<double> v) const;
};

SolitonProfile compute_soliton(int dim, double tolerance);

/// Re-derives the four constants from the stored samples by composite
/// quadrature with the dimension-N surface factor.
SolitonConstants soliton_constants(const SolitonProfile& profile);

/// psi0 = Q + r Q', the generator of the scaling family.
RadialField scaling_kernel_field(const SolitonProfile& profile);

/// L+ f = -Lap f + f - 3 Q^2 f with the radial Laplacian; -Lap f(0) = -N f''(0).
RadialField apply_linearized(const SolitonProfile& profile, const RadialField& field);

/// Ltilde f = L+ f + (2/a_star) Q * int(Q^3 f).
RadialField apply_nonlocal_operator(const SolitonProfile& profile, const RadialField& field);

/// int f(r) r^(N-1) dr times the N-dimensional surface area factor.
double radial_integral(const SolitonProfile& profile, const std::vector<double>& integrand);

double field_max_norm(const RadialField& f);

/// Smallest ||Ltilde f|| / ||f|| over radial fields with <f,psi0> = 0 and
/// int Q^3 f = 0, on a staggered grid of spacing h_sub truncated at r_cut.
double measure_coercivity(const SolitonProfile& profile, double h_sub = 0.02, double r_cut = 16.0);

/// CSV (header r,Q,Qprime) plus JSON sidecar with dim, tolerance, constants
/// and provenance.
void export_profile_csv(const SolitonProfile& profile, const std::string& csv_path,
                        const std::string& sidecar_json_path);
SolitonProfile import_profile_csv(const std::string& csv_path, const std::string& sidecar_json_path);

}  // namespace gplab
