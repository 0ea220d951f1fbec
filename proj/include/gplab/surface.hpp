#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "gplab/potential.hpp"

namespace gplab {

struct OutsideTube : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateGradient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Compact level set {F = 0} with exact gradient and Hessian of F.
/// Outward normal is grad F / |grad F| (times the orientation sign).
class LevelSurface {
 public:
  enum class Kind { Sphere, Ellipsoid };

  static LevelSurface sphere(int dim, double radius);
  static LevelSurface ellipsoid(int dim, Vec semi_axes);

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  double F(const Vec& x) const;
  Vec gradF(const Vec& x) const;
  Mat hessF(const Vec& x) const;
  LevelSurface flipped() const;  // F -> -F
  double membership_tol(const Vec& x) const { return 1e-12 * (1.0 + x.norm()); }
  const Vec& semi_axes() const { return axes_; }
  double radius() const { return radius_; }

 private:
  LevelSurface() = default;
  int dim_ = 2;
  Kind kind_ = Kind::Sphere;
  double radius_ = 1.0;
  Vec axes_;
  double orient_ = 1.0;
};

/// Point on Gamma with outward unit normal, orthonormal principal frame and
/// signed principal curvatures in the local-graph convention (unit sphere
/// with outward normal has kappa = -1).
struct FramedSurfacePoint {
  Vec x;
  Vec normal;
  Mat tangent;     // dim x (dim-1), columns are principal directions
  Vec curvatures;  // dim-1
};

/// Foot point of x0 on Gamma by damped Newton along the local normal line.
Vec project_to_surface(const LevelSurface& surface, const Vec& x0);

/// Frame and principal curvatures from the shape operator
/// -P (hess F) P / |grad F| restricted to the tangent space. The initial
/// tangent basis is randomized from `seed`; curvatures and the principal
/// subspaces do not depend on it.
FramedSurfacePoint frame_and_curvatures(const LevelSurface& surface, const Vec& x,
                                        std::uint64_t seed = 0);

/// Scalar derivatives of V and of Lap V at a framed surface point. The
/// tangential Hessian is the surface (graph) Hessian: ambient second
/// derivatives plus the (d LapV / d nu) * kappa diagonal correction.
struct SurfaceScalars {
  double dV_dnu;
  double d2V_dnu2;
  double laplV;
  double dlaplV_dnu;
  Vec grad_tau_laplV;   // components in the principal frame
  Mat hess_tau_laplV;   // (dim-1) x (dim-1)
};

SurfaceScalars surface_scalar_derivatives(const LevelSurface& surface, const Potential& potential,
                                          const FramedSurfacePoint& point);

}  // namespace gplab
