#include "gplab/surface.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace gplab {

LevelSurface LevelSurface::sphere(int dim, double radius) {
  LevelSurface s;
  s.dim_ = dim;
  s.kind_ = Kind::Sphere;
  s.radius_ = radius;
  return s;
}

LevelSurface LevelSurface::ellipsoid(int dim, Vec semi_axes) {
  if (semi_axes.size() != dim) throw std::invalid_argument("ellipsoid: semi_axes size != dim");
  LevelSurface s;
  s.dim_ = dim;
  s.kind_ = Kind::Ellipsoid;
  s.axes_ = std::move(semi_axes);
  return s;
}

LevelSurface LevelSurface::flipped() const {
  LevelSurface s = *this;
  s.orient_ = -orient_;
  return s;
}

double LevelSurface::F(const Vec& x) const {
  if (kind_ == Kind::Sphere) return orient_ * (x.norm() - radius_);
  return orient_ * ((x.array() / axes_.array()).square().sum() - 1.0);
}

Vec LevelSurface::gradF(const Vec& x) const {
  if (kind_ == Kind::Sphere) {
    const double r = x.norm();
    if (r < 1e-14) throw DegenerateGradient("sphere gradient at center");
    return orient_ / r * x;
  }
  return orient_ * 2.0 * (x.array() / axes_.array().square()).matrix();
}

Mat LevelSurface::hessF(const Vec& x) const {
  if (kind_ == Kind::Sphere) {
    const double r = x.norm();
    if (r < 1e-14) throw DegenerateGradient("sphere Hessian at center");
    const Vec u = x / r;
    return orient_ / r * (Mat::Identity(dim_, dim_) - u * u.transpose());
  }
  return orient_ * (2.0 / axes_.array().square()).matrix().asDiagonal();
}

Vec project_to_surface(const LevelSurface& surface, const Vec& x0) {
  Vec x = x0;
  for (int it = 0; it < 100; ++it) {
    const double f = surface.F(x);
    if (std::abs(f) < surface.membership_tol(x)) return x;
    const Vec g = surface.gradF(x);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-20) throw OutsideTube("gradient degenerates along projection path");
    const Vec step = -f / g2 * g;
    double t = 1.0;
    while (t > 1.0 / 64) {
      if (std::abs(surface.F(x + t * step)) < std::abs(f)) break;
      t *= 0.5;
    }
    x += t * step;
  }
  throw OutsideTube("projection did not converge");
}

FramedSurfacePoint frame_and_curvatures(const LevelSurface& surface, const Vec& x,
                                        std::uint64_t seed) {
  const int N = surface.dim();
  if (std::abs(surface.F(x)) >= surface.membership_tol(x))
    throw OutsideTube("point is not on the surface");
  const Vec g = surface.gradF(x);
  const double gn = g.norm();
  if (gn < 1e-10) throw DegenerateGradient("|grad F| below threshold");
  const Vec nu = g / gn;

  // randomized initial tangent basis, orthonormalized against nu
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss;
  Mat T(N, N - 1);
  for (int c = 0; c < N - 1; ++c) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      Vec v(N);
      for (int j = 0; j < N; ++j) v[j] = gauss(rng);
      v -= v.dot(nu) * nu;
      for (int p = 0; p < c; ++p) v -= v.dot(T.col(p)) * T.col(p);
      if (v.norm() > 1e-8) {
        T.col(c) = v / v.norm();
        break;
      }
    }
  }

  const Mat shape = -(T.transpose() * surface.hessF(x) * T) / gn;
  Eigen::SelfAdjointEigenSolver<Mat> es(shape);
  FramedSurfacePoint fp;
  fp.x = x;
  fp.normal = nu;
  fp.curvatures = es.eigenvalues();
  fp.tangent = T * es.eigenvectors();
  return fp;
}

SurfaceScalars surface_scalar_derivatives(const LevelSurface& surface, const Potential& potential,
                                          const FramedSurfacePoint& point) {
  const Vec g = surface.gradF(point.x);
  if (g.norm() < 1e-10) throw DegenerateGradient("|grad F| below threshold");
  const int N = surface.dim();
  SurfaceScalars s;
  const Vec gv = potential.grad(point.x);
  const Mat hv = potential.hess(point.x);
  s.dV_dnu = gv.dot(point.normal);
  s.d2V_dnu2 = point.normal.dot(hv * point.normal);
  s.laplV = potential.lapl(point.x);
  const Vec gl = potential.grad_lapl(point.x);
  const Mat hl = potential.hess_lapl(point.x);
  s.dlaplV_dnu = gl.dot(point.normal);
  s.grad_tau_laplV = point.tangent.transpose() * gl;
  s.hess_tau_laplV = point.tangent.transpose() * hl * point.tangent;
  for (int j = 0; j < N - 1; ++j) s.hess_tau_laplV(j, j) += s.dlaplV_dnu * point.curvatures[j];
  return s;
}

}  // namespace gplab
