#include "gplab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace gplab {

namespace {

// nearest detected peak to a candidate
const Peak* nearest_peak(const std::vector<Peak>& peaks, const Vec& b) {
  const Peak* best = nullptr;
  double bd = std::numeric_limits<double>::infinity();
  for (const auto& p : peaks) {
    const double d = (p.x - b).norm();
    if (d < bd) {
      bd = d;
      best = &p;
    }
  }
  return best;
}

}  // namespace

SweepRecord run_sweep_rung(const SweepConfig& config, double lambda) {
  if (!config.profile) throw std::invalid_argument("sweep config needs a soliton profile");
  const double eps = 1.0 / std::sqrt(lambda);
  auto potential = make_potential(config.dim, config.potential_spec);

  std::vector<Vec> centers;
  for (const auto& c : config.candidates) centers.push_back(c.b);
  const Grid grid = make_solver_grid(config.dim, config.grid_n, config.bc, centers, eps);

  PeakAnsatz ansatz;
  ansatz.epsilon = eps;
  if (config.mode == "cluster") {
    const auto& c = config.candidates.at(0);
    const double sep = config.cluster_theta * eps * std::abs(std::log(eps));
    const Vec tau = c.frame.tangent.col(0);
    for (int i = 0; i < config.cluster_k; ++i) {
      const double off = sep * (i - 0.5 * (config.cluster_k - 1));
      Vec x = c.b + off * tau;
      if (config.surface) x = project_to_surface(*config.surface, x);
      ansatz.entries.push_back({x, potential->value(x)});
    }
  } else {
    for (const auto& c : config.candidates) ansatz.entries.push_back({c.b, potential->value(c.b)});
  }

  GPState state = build_ansatz(grid, ansatz, *config.profile);
  NewtonOptions nopts = config.newton;
  nopts.expected_peaks = static_cast<int>(ansatz.entries.size());
  state = newton_solve(std::move(state), *potential, nopts);

  // matched reference: free soliton on the identical grid
  double a_star_ref = 0;
  {
    HarmonicPotential zero(config.dim, Vec::Zero(config.dim));
    PeakAnsatz free_ansatz;
    free_ansatz.epsilon = eps;
    free_ansatz.entries.push_back({config.candidates.at(0).b, 0.0});
    GPState ref = build_ansatz(grid, free_ansatz, *config.profile);
    NewtonOptions ropts = config.newton;
    ropts.expected_peaks = 1;
    ropts.tube_surface = nullptr;
    ref = newton_solve(std::move(ref), zero, ropts);
    a_star_ref = ref.mass_a;
  }

  SweepRecord rec;
  rec.lambda = lambda;
  rec.mass_a = state.mass_a;
  rec.a_star_ref = a_star_ref;
  rec.grid_spacing = grid.h(0);
  rec.peaks = state.peaks;
  rec.energy = state_energy(state, *potential);

  if (config.mode != "cluster") {
    for (const auto& c : config.candidates) {
      const Peak* p = nearest_peak(state.peaks, c.b);
      if (!p) continue;
      DriftObs d;
      d.total = (p->x - c.b).norm();
      if (config.surface) {
        const Vec foot = project_to_surface(*config.surface, p->x);
        const Vec g = config.surface->gradF(foot);
        d.normal = (p->x - foot).dot(g / g.norm());
        d.tangential = (foot - c.b).norm();
      } else {
        d.normal = d.total;
      }
      rec.drifts.push_back(d);
    }
  }

  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < state.peaks.size(); ++i)
    for (std::size_t j = i + 1; j < state.peaks.size(); ++j)
      min_sep = std::min(min_sep, (state.peaks[i].x - state.peaks[j].x).norm());
  for (const auto& p : state.peaks) {
    double margin = std::numeric_limits<double>::infinity();
    for (int ax = 0; ax < grid.dim; ++ax)
      margin = std::min(margin, grid.half[ax] - std::abs(p.x[ax]) - 4.0 * grid.h(ax));
    double radius = std::min(config.pohozaev_radius, margin);
    if (std::isfinite(min_sep)) radius = std::min(radius, 0.45 * min_sep);
    rec.pohozaev_defects.push_back(local_pohozaev_residual(state, *potential, p.x, radius));
  }
  return rec;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& config) {
  std::vector<double> ladder = config.lambda_ladder;
  std::sort(ladder.begin(), ladder.end());
  std::vector<SweepRecord> records(ladder.size());
  if (config.jobs <= 1) {
    for (std::size_t i = 0; i < ladder.size(); ++i) records[i] = run_sweep_rung(config, ladder[i]);
  } else {
    for (std::size_t start = 0; start < ladder.size(); start += config.jobs) {
      std::vector<std::future<SweepRecord>> futs;
      const std::size_t stop = std::min(ladder.size(), start + config.jobs);
      for (std::size_t i = start; i < stop; ++i) {
        const double lam = ladder[i];
        futs.push_back(
            std::async(std::launch::async, [&config, lam] { return run_sweep_rung(config, lam); }));
      }
      for (std::size_t i = start; i < stop; ++i) records[i] = futs[i - start].get();
    }
  }
  return records;
}

}  // namespace gplab
