#include "gplab/gp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gplab {

namespace {

using Field = std::vector<double>;

double field_dot(const Field& a, const Field& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// cubic interpolation of the radial profile, zero beyond its grid
double profile_at(const SolitonProfile& p, double r) {
  const double t = r / p.spacing;
  const long n = static_cast<long>(p.values.size());
  const long i = static_cast<long>(std::floor(t));
  if (i >= n - 2) return 0.0;
  const double s = t - i;
  auto q = [&](long j) { return p.values[std::min(std::max(std::abs(j), 0l), n - 1)]; };
  const double p0 = q(i - 1), p1 = q(i), p2 = q(i + 1), p3 = q(i + 2);
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * s + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * s * s +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * s * s * s);
}

Field tabulate_potential(const Grid& g, const Potential& pot) {
  Field v(g.total());
  for (long i = 0; i < g.total(); ++i) v[i] = pot.value(g.node(i));
  return v;
}

struct Operators {
  const Grid& grid;
  double eps2;
  const Field& vpot;
  SpectralWorkspace* sw;  // null in Dirichlet mode

  void residual(const Field& w, Field& out) {
    if (sw)
      sw->minus_laplacian(w, out);
    else
      fd_minus_laplacian(grid, w, out);
    for (std::size_t i = 0; i < w.size(); ++i)
      out[i] = eps2 * out[i] + (1.0 + eps2 * vpot[i]) * w[i] - w[i] * w[i] * w[i];
  }
  void jacobian(const Field& w, const Field& d, Field& out) {
    if (sw)
      sw->minus_laplacian(d, out);
    else
      fd_minus_laplacian(grid, d, out);
    for (std::size_t i = 0; i < d.size(); ++i)
      out[i] = eps2 * out[i] + (1.0 + eps2 * vpot[i] - 3.0 * w[i] * w[i]) * d[i];
  }
  void precondition(const Field& r, Field& out) {
    if (sw) {
      sw->helmholtz_solve(1.0, eps2, r, out);
    } else {
      out.resize(r.size());
      const double diag_lap = 2.0 * grid.dim / (grid.h(0) * grid.h(0));
      for (std::size_t i = 0; i < r.size(); ++i)
        out[i] = r[i] / (1.0 + eps2 * vpot[i] + eps2 * diag_lap);
    }
  }
};

// preconditioned MINRES for the symmetric indefinite Newton systems
int minres(Operators& op, const Field& w, const Field& b, Field& x, double rtol, int maxit) {
  const std::size_t n = b.size();
  x.assign(n, 0.0);
  Field r1 = b, r2 = b, y(n), v(n), w1(n, 0.0), w2(n, 0.0), tmp(n);
  op.precondition(b, y);
  double beta1 = field_dot(b, y);
  if (beta1 <= 0) return 0;
  beta1 = std::sqrt(beta1);
  double oldb = 0, beta = beta1, dbar = 0, epsln = 0, phibar = beta1, cs = -1, sn = 0;
  double oldeps = 0;
  for (int it = 1; it <= maxit; ++it) {
    for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / beta;
    op.jacobian(w, v, tmp);
    if (it >= 2)
      for (std::size_t i = 0; i < n; ++i) tmp[i] -= (beta / oldb) * r1[i];
    const double alfa = field_dot(v, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] -= (alfa / beta) * r2[i];
    r1 = r2;
    r2 = tmp;
    op.precondition(r2, y);
    oldb = beta;
    beta = field_dot(r2, y);
    if (beta < 0) return it;  // preconditioner lost positivity; bail with current x
    beta = std::sqrt(beta);
    oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    for (std::size_t i = 0; i < n; ++i) {
      const double wnew = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
      w1[i] = w2[i];
      w2[i] = wnew;
      x[i] += phi * wnew;
    }
    if (phibar < rtol * beta1) return it;
  }
  return maxit;
}

std::vector<Peak> detect_peaks_impl(const Grid& g, const Field& w) {
  const int n = g.n;
  double maxval = 0;
  for (double v : w) maxval = std::max(maxval, v);
  const double thresh = 0.5 * maxval;
  std::vector<Peak> peaks;

  auto wrapped = [&](long i) { return ((i % n) + n) % n; };
  auto value2 = [&](long i, long j) -> double {
    if (g.bc == Boundary::Periodic) return w[g.index2(wrapped(i), wrapped(j))];
    if (i < 0 || i >= n || j < 0 || j >= n) return 0.0;
    return w[g.index2(i, j)];
  };
  auto value3 = [&](long i, long j, long k) -> double {
    if (g.bc == Boundary::Periodic) return w[g.index3(wrapped(i), wrapped(j), wrapped(k))];
    if (i < 0 || i >= n || j < 0 || j >= n || k < 0 || k >= n) return 0.0;
    return w[g.index3(i, j, k)];
  };
  auto subgrid = [&](double fm, double f0, double fp, double h) -> std::pair<double, double> {
    const double denom = fm - 2.0 * f0 + fp;
    if (std::abs(denom) < 1e-300) return {0.0, f0};
    const double delta = 0.5 * (fm - fp) / denom * h;
    return {delta, f0 - 0.125 * (fm - fp) * (fm - fp) / denom};
  };

  if (g.dim == 2) {
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) {
        const double f0 = value2(i, j);
        if (f0 < thresh) continue;
        bool is_max = true;
        for (long di = -1; di <= 1 && is_max; ++di)
          for (long dj = -1; dj <= 1; ++dj) {
            if (!di && !dj) continue;
            if (value2(i + di, j + dj) >= f0) {
              is_max = false;
              break;
            }
          }
        if (!is_max) continue;
        Peak p;
        p.x = Vec(2);
        auto [dx, hx] = subgrid(value2(i - 1, j), f0, value2(i + 1, j), g.h(0));
        auto [dy, hy] = subgrid(value2(i, j - 1), f0, value2(i, j + 1), g.h(1));
        p.x[0] = g.coord(0, i) + dx;
        p.x[1] = g.coord(1, j) + dy;
        p.height = f0 + (hx - f0) + (hy - f0);
        peaks.push_back(p);
      }
  } else {
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        for (long k = 0; k < n; ++k) {
          const double f0 = value3(i, j, k);
          if (f0 < thresh) continue;
          bool is_max = true;
          for (long di = -1; di <= 1 && is_max; ++di)
            for (long dj = -1; dj <= 1 && is_max; ++dj)
              for (long dk = -1; dk <= 1; ++dk) {
                if (!di && !dj && !dk) continue;
                if (value3(i + di, j + dj, k + dk) >= f0) {
                  is_max = false;
                  break;
                }
              }
          if (!is_max) continue;
          Peak p;
          p.x = Vec(3);
          auto [dx, hx] = subgrid(value3(i - 1, j, k), f0, value3(i + 1, j, k), g.h(0));
          auto [dy, hy] = subgrid(value3(i, j - 1, k), f0, value3(i, j + 1, k), g.h(1));
          auto [dz, hz] = subgrid(value3(i, j, k - 1), f0, value3(i, j, k + 1), g.h(2));
          p.x[0] = g.coord(0, i) + dx;
          p.x[1] = g.coord(1, j) + dy;
          p.x[2] = g.coord(2, k) + dz;
          p.height = f0 + (hx - f0) + (hy - f0) + (hz - f0);
          peaks.push_back(p);
        }
  }
  // merge maxima closer than 3h, keep the taller one
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.height > b.height; });
  std::vector<Peak> merged;
  for (const auto& p : peaks) {
    bool close = false;
    for (const auto& q : merged)
      if ((p.x - q.x).norm() < 3.0 * g.h(0)) close = true;
    if (!close) merged.push_back(p);
  }
  std::sort(merged.begin(), merged.end(), [](const Peak& a, const Peak& b) {
    for (int j = 0; j < a.x.size(); ++j) {
      if (a.x[j] < b.x[j] - 1e-12) return true;
      if (a.x[j] > b.x[j] + 1e-12) return false;
    }
    return false;
  });
  return merged;
}

}  // namespace

double PeakAnsatz::min_separation_over_eps() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = i + 1; j < entries.size(); ++j)
      m = std::min(m, (entries[i].center - entries[j].center).norm() / epsilon);
  return m;
}

double state_mass(const Grid& grid, const std::vector<double>& w, double lambda) {
  return lambda * dot(grid, w, w);
}

GPState build_ansatz(const Grid& grid, const PeakAnsatz& ansatz, const SolitonProfile& profile) {
  profile.require_certified();
  const double eps = ansatz.epsilon;
  for (const auto& e : ansatz.entries)
    for (int ax = 0; ax < grid.dim; ++ax)
      if (grid.half[ax] - std::abs(e.center[ax]) < 8.0 * eps)
        throw PeakOutsideBox("candidate within 8 healing lengths of the box face");

  GPState st;
  st.grid = grid;
  st.lambda = 1.0 / (eps * eps);
  st.w.assign(grid.total(), 0.0);
  for (const auto& e : ansatz.entries) {
    const double scale = std::sqrt(1.0 + eps * eps * e.v_local);
    for (long i = 0; i < grid.total(); ++i) {
      const Vec x = grid.node(i);
      const double r = (x - e.center).norm() * scale / eps;
      st.w[i] += scale * profile_at(profile, r);
    }
  }
  st.mass_a = state_mass(grid, st.w, st.lambda);
  st.peaks = detect_peaks_impl(grid, st.w);
  return st;
}

GPState newton_solve(GPState state, const Potential& potential, const NewtonOptions& opts) {
  const Grid& g = state.grid;
  const double eps2 = 1.0 / state.lambda;
  Field vpot = tabulate_potential(g, potential);
  std::unique_ptr<SpectralWorkspace> sw;
  if (g.bc == Boundary::Periodic) sw = std::make_unique<SpectralWorkspace>(g);
  Operators op{g, eps2, vpot, sw.get()};

  const int expected =
      opts.expected_peaks >= 0 ? opts.expected_peaks : static_cast<int>(state.peaks.size());

  Field F(g.total()), delta, trial(g.total()), Ft(g.total());
  op.residual(state.w, F);
  double wn = std::sqrt(field_dot(state.w, state.w));
  double rn = std::sqrt(field_dot(F, F)) / wn;
  int it = 0;
  while (rn > opts.tol) {
    if (++it > opts.max_iter) throw NoConvergence("Newton iteration limit reached");
    Field rhs(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) rhs[i] = -F[i];
    minres(op, state.w, rhs, delta, opts.krylov_rtol, opts.krylov_max);

    // backtracking on the residual norm, factor 0.5, floor 1/64
    double t = 1.0;
    bool accepted = false;
    const double abs_rn = rn * wn;
    while (t >= 1.0 / 64) {
      for (std::size_t i = 0; i < F.size(); ++i) trial[i] = state.w[i] + t * delta[i];
      op.residual(trial, Ft);
      if (std::sqrt(field_dot(Ft, Ft)) < abs_rn) {
        state.w.swap(trial);
        F.swap(Ft);
        wn = std::sqrt(field_dot(state.w, state.w));
        rn = std::sqrt(field_dot(F, F)) / wn;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) throw NoConvergence("Newton line search stalled");
  }

  double wmin = 0, wmax = 0;
  for (double v : state.w) {
    wmin = std::min(wmin, v);
    wmax = std::max(wmax, v);
  }
  if (wmin < -1e-8 * wmax) throw NoConvergence("positivity violated by converged state");

  state.residual_norm = rn;
  state.mass_a = state_mass(g, state.w, state.lambda);
  state.peaks = detect_peaks_impl(g, state.w);
  if (expected > 0 && static_cast<int>(state.peaks.size()) < expected)
    throw PeakCollapse("a peak vanished during the solve");
  if (opts.tube_surface) {
    for (const auto& p : state.peaks)
      if (std::abs(opts.tube_surface->F(p.x)) > opts.tube_delta)
        throw PeakMigrationOutOfTube("peak settled outside the surface tube");
  }
  return state;
}

std::vector<Peak> detect_peaks(const GPState& state) {
  return detect_peaks_impl(state.grid, state.w);
}

double local_pohozaev_residual(const GPState& state, const Potential& potential, const Vec& center,
                               double radius) {
  const Grid& g = state.grid;
  const int N = g.dim;
  for (int ax = 0; ax < N; ++ax)
    if (std::abs(center[ax]) + radius > g.half[ax] - 3.0 * g.h(ax))
      throw BallOutsideGrid("ball not contained in the grid");

  const double s2 = dot(g, state.w, state.w);
  const double s = std::sqrt(s2);
  const double a = state.mass_a;
  const double mu = -state.lambda;

  // u = w / ||w||, grad u per axis
  std::array<Field, 3> du;
  {
    std::unique_ptr<SpectralWorkspace> sw;
    if (g.bc == Boundary::Periodic) sw = std::make_unique<SpectralWorkspace>(g);
    for (int ax = 0; ax < N; ++ax) {
      if (sw)
        sw->gradient(ax, state.w, du[ax]);
      else
        fd_gradient(g, ax, state.w, du[ax]);
      for (double& v : du[ax]) v /= s;
    }
  }
  Field u(g.total());
  for (long i = 0; i < g.total(); ++i) u[i] = state.w[i] / s;

  // volume side: (N-2) int |grad u|^2 + int (N V + <grad V, x-c>) u^2
  //              - (a N / 2) int u^4 - mu N int u^2
  double t_grad = 0, t_pot = 0, t_u2 = 0, t_u4 = 0;
  for (long i = 0; i < g.total(); ++i) {
    const Vec x = g.node(i);
    if ((x - center).norm() > radius) continue;
    double g2 = 0;
    for (int ax = 0; ax < N; ++ax) g2 += du[ax][i] * du[ax][i];
    const double uu = u[i] * u[i];
    t_grad += g2;
    t_pot += (N * potential.value(x) + potential.grad(x).dot(x - center)) * uu;
    t_u2 += uu;
    t_u4 += uu * uu;
  }
  const double cell = g.cell();
  const double lhs =
      (N - 2) * t_grad * cell + t_pot * cell - 0.5 * a * N * t_u4 * cell - mu * N * t_u2 * cell;

  // flux side on the sphere of radius d
  double flux = 0;
  auto flux_at = [&](const Vec& xs, const Vec& nu, double wgt) {
    Vec gu(N);
    for (int ax = 0; ax < N; ++ax) gu[ax] = interpolate(g, du[ax], xs);
    const double us = interpolate(g, u, xs);
    const double dun = gu.dot(nu);
    const Vec rel = xs - center;
    const double term = -2.0 * dun * rel.dot(gu) +
                        radius * (gu.squaredNorm() + potential.value(xs) * us * us -
                                  mu * us * us - 0.5 * a * us * us * us * us);
    flux += wgt * term;
  };
  if (N == 2) {
    const int m = 720;
    for (int i = 0; i < m; ++i) {
      const double th = 2.0 * M_PI * i / m;
      Vec nu(2);
      nu << std::cos(th), std::sin(th);
      flux_at(center + radius * nu, nu, radius * 2.0 * M_PI / m);
    }
  } else {
    const int mth = 48, mph = 96;
    for (int i = 0; i < mth; ++i) {
      // midpoint rule in cos(theta)
      const double c = -1.0 + (i + 0.5) * 2.0 / mth;
      const double sth = std::sqrt(std::max(0.0, 1.0 - c * c));
      for (int j = 0; j < mph; ++j) {
        const double ph = 2.0 * M_PI * j / mph;
        Vec nu(3);
        nu << sth * std::cos(ph), sth * std::sin(ph), c;
        flux_at(center + radius * nu, nu, radius * radius * (2.0 / mth) * (2.0 * M_PI / mph));
      }
    }
  }
  return std::abs(lhs - flux) / (std::abs(lhs) + std::abs(flux) + 1e-300);
}

double state_energy(const GPState& state, const Potential& potential) {
  const Grid& g = state.grid;
  const double s2 = dot(g, state.w, state.w);
  double grad = 0;
  {
    std::unique_ptr<SpectralWorkspace> sw;
    Field d;
    if (g.bc == Boundary::Periodic) sw = std::make_unique<SpectralWorkspace>(g);
    for (int ax = 0; ax < g.dim; ++ax) {
      if (sw)
        sw->gradient(ax, state.w, d);
      else
        fd_gradient(g, ax, state.w, d);
      grad += dot(g, d, d);
    }
  }
  double pot = 0, quart = 0;
  for (long i = 0; i < g.total(); ++i) {
    pot += potential.value(g.node(i)) * state.w[i] * state.w[i];
    quart += std::pow(state.w[i], 4);
  }
  pot *= g.cell();
  quart *= g.cell();
  return (grad + pot - 0.25 * state.lambda * quart) / s2;
}

double energy_from_v(const Grid& grid, const Potential& potential, const std::vector<double>& v) {
  const double m = dot(grid, v, v);
  double grad = 0;
  {
    std::unique_ptr<SpectralWorkspace> sw;
    Field d;
    if (grid.bc == Boundary::Periodic) sw = std::make_unique<SpectralWorkspace>(grid);
    for (int ax = 0; ax < grid.dim; ++ax) {
      if (sw)
        sw->gradient(ax, v, d);
      else
        fd_gradient(grid, ax, v, d);
      grad += dot(grid, d, d);
    }
  }
  double pot = 0, quart = 0;
  for (long i = 0; i < grid.total(); ++i) {
    pot += potential.value(grid.node(i)) * v[i] * v[i];
    quart += std::pow(v[i], 4);
  }
  pot *= grid.cell();
  quart *= grid.cell();
  return (grad + pot - 0.25 * quart) / m;
}

void ground_flow_step(SpectralWorkspace& sw, const std::vector<double>& vpot, double dt,
                      double a_target, std::vector<double>& v) {
  const Grid& g = sw.grid();
  Field rhs(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) rhs[i] = v[i] + dt * (-vpot[i] * v[i] + v[i] * v[i] * v[i]);
  Field vstar;
  sw.helmholtz_solve(1.0, dt, rhs, vstar);
  const double m = dot(g, vstar, vstar);
  const double scale = std::sqrt(a_target / m);
  v.resize(vstar.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = vstar[i] * scale;
}

GroundFlowResult ground_state_gradient_flow(const Grid& grid, const Potential& potential,
                                            double a_target, const GroundFlowOptions& opts) {
  if (grid.bc != Boundary::Periodic)
    throw std::invalid_argument("gradient flow implemented for the periodic mode");
  SpectralWorkspace sw(grid);
  Field vpot = tabulate_potential(grid, potential);

  Field v;
  if (opts.init) {
    v = *opts.init;
  } else {
    long imin = 0;
    for (long i = 1; i < grid.total(); ++i)
      if (vpot[i] < vpot[imin]) imin = i;
    const Vec c = grid.node(imin);
    const double width = grid.half[0] / 4.0;
    v.resize(grid.total());
    for (long i = 0; i < grid.total(); ++i)
      v[i] = std::exp(-(grid.node(i) - c).squaredNorm() / (2.0 * width * width));
  }
  {
    const double m = dot(grid, v, v);
    const double scale = std::sqrt(a_target / m);
    for (double& x : v) x *= scale;
  }

  double v0max = 0;
  for (double x : v) v0max = std::max(v0max, std::abs(x));

  GroundFlowResult res;
  Field prev;
  for (long step = 1; step <= opts.max_steps; ++step) {
    prev = v;
    ground_flow_step(sw, vpot, opts.dt, a_target, v);
    double vmax = 0, diff2 = 0, norm2 = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      vmax = std::max(vmax, std::abs(v[i]));
      diff2 += (v[i] - prev[i]) * (v[i] - prev[i]);
      norm2 += prev[i] * prev[i];
    }
    if (vmax > opts.collapse_factor * std::max(v0max, 1e-12))
      throw CollapseDetected("amplitude grew beyond the trust bound");
    res.steps = step;
    if (std::sqrt(diff2 / norm2) < opts.tol) break;
    if (step == opts.max_steps) throw NoConvergence("gradient flow did not settle");
  }

  res.v = v;
  res.mass = dot(grid, v, v);
  // mu from the Rayleigh quotient of the stationary equation
  double grad = 0;
  {
    Field d;
    for (int ax = 0; ax < grid.dim; ++ax) {
      sw.gradient(ax, v, d);
      grad += dot(grid, d, d);
    }
  }
  double pot = 0, quart = 0;
  for (long i = 0; i < grid.total(); ++i) {
    pot += vpot[i] * v[i] * v[i];
    quart += std::pow(v[i], 4);
  }
  pot *= grid.cell();
  quart *= grid.cell();
  res.mu = (grad + pot - quart) / res.mass;
  res.energy = energy_from_v(grid, potential, v);

  if (res.mu < 0) {
    GPState st;
    st.grid = grid;
    st.lambda = -res.mu;
    st.w.resize(v.size());
    const double scale = 1.0 / std::sqrt(st.lambda);
    for (std::size_t i = 0; i < v.size(); ++i) st.w[i] = v[i] * scale;
    st.mass_a = state_mass(grid, st.w, st.lambda);
    st.peaks = detect_peaks_impl(grid, st.w);
    Field F(st.w.size());
    Operators op{grid, 1.0 / st.lambda, vpot, &sw};
    op.residual(st.w, F);
    st.residual_norm = std::sqrt(field_dot(F, F)) / std::sqrt(field_dot(st.w, st.w));
    res.state = std::move(st);
  }
  return res;
}

ContinuationResult mass_continuation(const std::vector<PeakAnsatz::Entry>& candidates,
                                     const Potential& potential, const SolitonProfile& profile,
                                     double a_target, std::array<double, 2> lambda_bracket,
                                     const Grid& grid, const NewtonOptions& nopts) {
  ContinuationResult res;
  std::vector<Vec> centers;
  for (const auto& c : candidates) centers.push_back(c.center);

  auto solve_at = [&](double lambda) -> GPState {
    PeakAnsatz ans;
    ans.epsilon = 1.0 / std::sqrt(lambda);
    for (const auto& c : centers) ans.entries.push_back({c, potential.value(c)});
    GPState st = build_ansatz(grid, ans, profile);
    NewtonOptions local = nopts;
    local.expected_peaks = static_cast<int>(candidates.size());
    st = newton_solve(std::move(st), potential, local);
    // warm-start the next solve from the settled peak locations
    if (st.peaks.size() == candidates.size()) {
      centers.clear();
      for (const auto& p : st.peaks) centers.push_back(p.x);
    }
    res.solves++;
    res.measured_map.emplace_back(lambda, st.mass_a);
    return st;
  };

  double lo = lambda_bracket[0], hi = lambda_bracket[1];
  GPState slo = solve_at(lo);
  GPState shi = solve_at(hi);
  double flo = slo.mass_a - a_target, fhi = shi.mass_a - a_target;
  if (flo * fhi > 0) {
    std::ostringstream msg;
    msg << "bracket does not straddle a_target; measured map:";
    for (auto& [l, m] : res.measured_map) msg << " (" << l << ", " << m << ")";
    throw BracketInvalid(msg.str());
  }

  GPState best = std::abs(flo) < std::abs(fhi) ? slo : shi;
  bool use_bisection = false;
  for (int it = 0; it < 60; ++it) {
    if (std::abs(best.mass_a - a_target) < 1e-8 * std::abs(a_target)) break;
    double mid;
    if (!use_bisection && std::abs(fhi - flo) > 1e-300) {
      mid = lo - flo * (hi - lo) / (fhi - flo);
      if (!(mid > std::min(lo, hi) && mid < std::max(lo, hi))) {
        use_bisection = true;
        mid = 0.5 * (lo + hi);
      }
    } else {
      mid = 0.5 * (lo + hi);
    }
    GPState smid = solve_at(mid);
    const double fmid = smid.mass_a - a_target;
    // the mass map should be monotone inside the bracket; if the new sample
    // disagrees with the secant model switch to bisection and flag it
    if ((fmid - flo) * (fhi - fmid) < 0) {
      res.non_monotone = true;
      use_bisection = true;
    }
    if (flo * fmid <= 0) {
      hi = mid;
      fhi = fmid;
    } else {
      lo = mid;
      flo = fmid;
    }
    if (std::abs(fmid) < std::abs(best.mass_a - a_target)) best = smid;
    if (it == 59) throw NoConvergence("mass continuation did not reach target");
  }
  res.state = std::move(best);
  return res;
}

}  // namespace gplab
