#pragma once

#include <array>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "gplab/potential.hpp"

namespace gplab {

struct PeakOutsideBox : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Boundary { Periodic, Dirichlet };

/// Tensor grid on a box [-L_j, L_j]^N. Periodic nodes sit at -L + i h
/// (no duplicate at +L); Dirichlet nodes are interior with zero boundary.
struct Grid {
  int dim = 2;
  int n = 128;
  Boundary bc = Boundary::Periodic;
  std::array<double, 3> half = {1.0, 1.0, 1.0};

  Grid() = default;
  Grid(int dim_, int n_, Boundary bc_, std::array<double, 3> half_);

  long total() const;
  double h(int axis) const {
    return bc == Boundary::Periodic ? 2.0 * half[axis] / n : 2.0 * half[axis] / (n + 1);
  }
  double cell() const;
  double coord(int axis, long i) const {
    return bc == Boundary::Periodic ? -half[axis] + i * h(axis) : -half[axis] + (i + 1) * h(axis);
  }
  Vec node(long flat) const;
  long index2(long i, long j) const { return i * n + j; }
  long index3(long i, long j, long k) const { return (i * n + j) * n + k; }
};

/// half-width rule: 2.5 x largest candidate coordinate + 8 healing lengths.
Grid make_solver_grid(int dim, int n, Boundary bc, const std::vector<Vec>& centers,
                      double epsilon_max);

double integrate(const Grid& g, const std::vector<double>& f);
double dot(const Grid& g, const std::vector<double>& a, const std::vector<double>& b);
double norm_l2(const Grid& g, const std::vector<double>& f);

/// Separable cubic (Catmull-Rom) interpolation; periodic wrap or zero
/// extension according to the grid's boundary mode.
double interpolate(const Grid& g, const std::vector<double>& f, const Vec& x);

/// FFTW-backed spectral operators for the periodic mode. Plans are created
/// once per workspace; creation is serialized internally.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const Grid& g);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const Grid& grid() const { return grid_; }
  void minus_laplacian(const std::vector<double>& in, std::vector<double>& out);
  /// solves (alpha - beta Lap) x = b
  void helmholtz_solve(double alpha, double beta, const std::vector<double>& in,
                       std::vector<double>& out);
  void gradient(int axis, const std::vector<double>& in, std::vector<double>& out);

 private:
  void forward(const std::vector<double>& in);
  void inverse(std::vector<double>& out);
  Grid grid_;
  long nc_ = 0;  // complex count
  double* real_ = nullptr;
  std::complex<double>* cplx_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
  std::vector<double> k2_;                // |k|^2 per complex index
  std::array<std::vector<double>, 3> k_;  // per-axis wavenumber per complex index
};

/// Second-order operators for the Dirichlet mode (zero ghost nodes).
void fd_minus_laplacian(const Grid& g, const std::vector<double>& in, std::vector<double>& out);
void fd_gradient(const Grid& g, int axis, const std::vector<double>& in, std::vector<double>& out);

}  // namespace gplab
