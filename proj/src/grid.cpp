#include "gplab/grid.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace gplab {

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

bool fft_friendly(int n) {
  for (int p : {2, 3, 5})
    while (n % p == 0) n /= p;
  return n == 1;
}
}  // namespace

Grid::Grid(int dim_, int n_, Boundary bc_, std::array<double, 3> half_)
    : dim(dim_), n(n_), bc(bc_), half(half_) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("grid dim must be 2 or 3");
  if (n < 8) throw std::invalid_argument("grid too small");
  if (bc == Boundary::Periodic && !fft_friendly(n))
    throw std::invalid_argument("points per axis must factor into 2,3,5 for the spectral mode");
}

long Grid::total() const {
  long t = 1;
  for (int j = 0; j < dim; ++j) t *= n;
  return t;
}

double Grid::cell() const {
  double c = 1;
  for (int j = 0; j < dim; ++j) c *= h(j);
  return c;
}

Vec Grid::node(long flat) const {
  Vec x(dim);
  if (dim == 2) {
    x[1] = coord(1, flat % n);
    x[0] = coord(0, flat / n);
  } else {
    x[2] = coord(2, flat % n);
    x[1] = coord(1, (flat / n) % n);
    x[0] = coord(0, flat / (static_cast<long>(n) * n));
  }
  return x;
}

Grid make_solver_grid(int dim, int n, Boundary bc, const std::vector<Vec>& centers,
                      double epsilon_max) {
  double cmax = 0;
  for (const auto& c : centers)
    for (int j = 0; j < dim; ++j) cmax = std::max(cmax, std::abs(c[j]));
  const double L = 2.5 * cmax + 8.0 * epsilon_max;
  return Grid(dim, n, bc, {L, L, L});
}

double integrate(const Grid& g, const std::vector<double>& f) {
  double s = 0;
  for (double v : f) s += v;
  return s * g.cell();
}

double dot(const Grid& g, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * g.cell();
}

double norm_l2(const Grid& g, const std::vector<double>& f) { return std::sqrt(dot(g, f, f)); }

namespace {
inline double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}
}  // namespace

double interpolate(const Grid& g, const std::vector<double>& f, const Vec& x) {
  const int N = g.dim;
  long base[3];
  double frac[3];
  for (int ax = 0; ax < N; ++ax) {
    const double t = (x[ax] - g.coord(ax, 0)) / g.h(ax);
    const double fl = std::floor(t);
    base[ax] = static_cast<long>(fl);
    frac[ax] = t - fl;
  }
  auto sample = [&](long i, long j, long k) -> double {
    long idx[3] = {i, j, k};
    for (int ax = 0; ax < N; ++ax) {
      if (g.bc == Boundary::Periodic) {
        idx[ax] = ((idx[ax] % g.n) + g.n) % g.n;
      } else if (idx[ax] < 0 || idx[ax] >= g.n) {
        return 0.0;
      }
    }
    return N == 2 ? f[g.index2(idx[0], idx[1])] : f[g.index3(idx[0], idx[1], idx[2])];
  };
  if (N == 2) {
    double rows[4];
    for (int a = -1; a <= 2; ++a) {
      double c[4];
      for (int b = -1; b <= 2; ++b) c[b + 1] = sample(base[0] + a, base[1] + b, 0);
      rows[a + 1] = catmull_rom(c[0], c[1], c[2], c[3], frac[1]);
    }
    return catmull_rom(rows[0], rows[1], rows[2], rows[3], frac[0]);
  }
  double planes[4];
  for (int a = -1; a <= 2; ++a) {
    double rows[4];
    for (int b = -1; b <= 2; ++b) {
      double c[4];
      for (int cidx = -1; cidx <= 2; ++cidx)
        c[cidx + 1] = sample(base[0] + a, base[1] + b, base[2] + cidx);
      rows[b + 1] = catmull_rom(c[0], c[1], c[2], c[3], frac[2]);
    }
    planes[a + 1] = catmull_rom(rows[0], rows[1], rows[2], rows[3], frac[1]);
  }
  return catmull_rom(planes[0], planes[1], planes[2], planes[3], frac[0]);
}

SpectralWorkspace::SpectralWorkspace(const Grid& g) : grid_(g) {
  if (g.bc != Boundary::Periodic) throw std::invalid_argument("spectral workspace needs periodic grid");
  const int n = g.n;
  const long nr = g.total();
  nc_ = (g.dim == 2) ? static_cast<long>(n) * (n / 2 + 1)
                     : static_cast<long>(n) * n * (n / 2 + 1);
  std::lock_guard lock(plan_mutex());
  real_ = fftw_alloc_real(nr);
  cplx_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(nc_));
  if (g.dim == 2) {
    plan_fwd_ = fftw_plan_dft_r2c_2d(n, n, real_, reinterpret_cast<fftw_complex*>(cplx_),
                                     FFTW_MEASURE);
    plan_bwd_ = fftw_plan_dft_c2r_2d(n, n, reinterpret_cast<fftw_complex*>(cplx_), real_,
                                     FFTW_MEASURE);
  } else {
    plan_fwd_ = fftw_plan_dft_r2c_3d(n, n, n, real_, reinterpret_cast<fftw_complex*>(cplx_),
                                     FFTW_MEASURE);
    plan_bwd_ = fftw_plan_dft_c2r_3d(n, n, n, reinterpret_cast<fftw_complex*>(cplx_), real_,
                                     FFTW_MEASURE);
  }

  k2_.resize(nc_);
  for (int ax = 0; ax < g.dim; ++ax) k_[ax].assign(nc_, 0.0);
  auto wavenumber = [&](int ax, long m) {
    const long mm = (m <= n / 2) ? m : m - n;
    return M_PI / g.half[ax] * static_cast<double>(mm);
  };
  const long nz = n / 2 + 1;
  if (g.dim == 2) {
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < nz; ++j) {
        const long idx = i * nz + j;
        const double kx = wavenumber(0, i), ky = wavenumber(1, j);
        k2_[idx] = kx * kx + ky * ky;
        k_[0][idx] = (2 * i == n) ? 0.0 : kx;  // drop Nyquist in first derivatives
        k_[1][idx] = (2 * j == n) ? 0.0 : ky;
      }
  } else {
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        for (long k = 0; k < nz; ++k) {
          const long idx = (i * n + j) * nz + k;
          const double kx = wavenumber(0, i), ky = wavenumber(1, j), kz = wavenumber(2, k);
          k2_[idx] = kx * kx + ky * ky + kz * kz;
          k_[0][idx] = (2 * i == n) ? 0.0 : kx;
          k_[1][idx] = (2 * j == n) ? 0.0 : ky;
          k_[2][idx] = (2 * k == n) ? 0.0 : kz;
        }
  }
}

SpectralWorkspace::~SpectralWorkspace() {
  std::lock_guard lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(real_);
  fftw_free(cplx_);
}

void SpectralWorkspace::forward(const std::vector<double>& in) {
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
}

void SpectralWorkspace::inverse(std::vector<double>& out) {
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  const double scale = 1.0 / static_cast<double>(grid_.total());
  out.resize(grid_.total());
  for (long i = 0; i < grid_.total(); ++i) out[i] = real_[i] * scale;
}

void SpectralWorkspace::minus_laplacian(const std::vector<double>& in, std::vector<double>& out) {
  forward(in);
  for (long i = 0; i < nc_; ++i) cplx_[i] *= k2_[i];
  inverse(out);
}

void SpectralWorkspace::helmholtz_solve(double alpha, double beta, const std::vector<double>& in,
                                        std::vector<double>& out) {
  forward(in);
  for (long i = 0; i < nc_; ++i) cplx_[i] /= (alpha + beta * k2_[i]);
  inverse(out);
}

void SpectralWorkspace::gradient(int axis, const std::vector<double>& in, std::vector<double>& out) {
  forward(in);
  const std::complex<double> iunit(0.0, 1.0);
  for (long i = 0; i < nc_; ++i) cplx_[i] *= iunit * k_[axis][i];
  inverse(out);
}

void fd_minus_laplacian(const Grid& g, const std::vector<double>& in, std::vector<double>& out) {
  const int n = g.n;
  out.assign(in.size(), 0.0);
  if (g.dim == 2) {
    const double ix2 = 1.0 / (g.h(0) * g.h(0)), iy2 = 1.0 / (g.h(1) * g.h(1));
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) {
        const long c = g.index2(i, j);
        const double um = i > 0 ? in[g.index2(i - 1, j)] : 0.0;
        const double up = i + 1 < n ? in[g.index2(i + 1, j)] : 0.0;
        const double vm = j > 0 ? in[g.index2(i, j - 1)] : 0.0;
        const double vp = j + 1 < n ? in[g.index2(i, j + 1)] : 0.0;
        out[c] = -((um - 2 * in[c] + up) * ix2 + (vm - 2 * in[c] + vp) * iy2);
      }
  } else {
    const double ix2 = 1.0 / (g.h(0) * g.h(0)), iy2 = 1.0 / (g.h(1) * g.h(1)),
                 iz2 = 1.0 / (g.h(2) * g.h(2));
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        for (long k = 0; k < n; ++k) {
          const long c = g.index3(i, j, k);
          const double xm = i > 0 ? in[g.index3(i - 1, j, k)] : 0.0;
          const double xp = i + 1 < n ? in[g.index3(i + 1, j, k)] : 0.0;
          const double ym = j > 0 ? in[g.index3(i, j - 1, k)] : 0.0;
          const double yp = j + 1 < n ? in[g.index3(i, j + 1, k)] : 0.0;
          const double zm = k > 0 ? in[g.index3(i, j, k - 1)] : 0.0;
          const double zp = k + 1 < n ? in[g.index3(i, j, k + 1)] : 0.0;
          out[c] = -((xm - 2 * in[c] + xp) * ix2 + (ym - 2 * in[c] + yp) * iy2 +
                     (zm - 2 * in[c] + zp) * iz2);
        }
  }
}

void fd_gradient(const Grid& g, int axis, const std::vector<double>& in, std::vector<double>& out) {
  const int n = g.n;
  out.assign(in.size(), 0.0);
  auto at2 = [&](long i, long j) { return (i < 0 || i >= n || j < 0 || j >= n) ? 0.0 : in[g.index2(i, j)]; };
  auto at3 = [&](long i, long j, long k) {
    return (i < 0 || i >= n || j < 0 || j >= n || k < 0 || k >= n) ? 0.0 : in[g.index3(i, j, k)];
  };
  const double ih = 1.0 / (2.0 * g.h(axis));
  if (g.dim == 2) {
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        out[g.index2(i, j)] = axis == 0 ? (at2(i + 1, j) - at2(i - 1, j)) * ih
                                        : (at2(i, j + 1) - at2(i, j - 1)) * ih;
  } else {
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        for (long k = 0; k < n; ++k) {
          double d;
          if (axis == 0)
            d = (at3(i + 1, j, k) - at3(i - 1, j, k)) * ih;
          else if (axis == 1)
            d = (at3(i, j + 1, k) - at3(i, j - 1, k)) * ih;
          else
            d = (at3(i, j, k + 1) - at3(i, j, k - 1)) * ih;
          out[g.index3(i, j, k)] = d;
        }
  }
}

}  // namespace gplab
