#include "gplab/peak_locator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace gplab {

namespace {

// One candidate from a converged root: frame, scalars, admissibility,
// certificates.
PeakCandidate build_candidate(const LevelSurface& surface, const Potential& potential, const Vec& x,
                              double lambda, std::uint64_t frame_seed) {
  PeakCandidate c;
  c.b = x;
  c.frame = frame_and_curvatures(surface, x, frame_seed);
  c.v_at_b = potential.value(x);
  c.lagrange_multiplier = lambda;
  const SurfaceScalars s = surface_scalar_derivatives(surface, potential, c.frame);
  c.laplV_at_b = s.laplV;
  c.tangential_grad_laplV = s.grad_tau_laplV;
  c.dlaplV_dnu = s.dlaplV_dnu;
  c.d2V_dnu2 = s.d2V_dnu2;
  const double scale = std::max(1.0, potential.hess_lapl(x).norm());
  c.admissible = c.tangential_grad_laplV.norm() < 1e-8 * scale;
  certify_nondegeneracy(surface, potential, c);
  fill_uniqueness_matrix(surface, potential, c);
  return c;
}

}  // namespace

std::vector<PeakCandidate> find_surface_critical_points(const LevelSurface& surface,
                                                        const Potential& potential,
                                                        const std::vector<Vec>& seeds,
                                                        const LocatorOptions& opts,
                                                        int* dropped_seeds) {
  const int N = surface.dim();
  std::vector<std::pair<Vec, double>> roots;
  int dropped = 0;
  for (const Vec& seed : seeds) {
    try {
      Vec x = project_to_surface(surface, seed);
      const Vec g0 = surface.gradF(x);
      double lambda = potential.grad_lapl(x).dot(g0) / g0.squaredNorm();
      bool ok = false;
      for (int it = 0; it < opts.max_iter; ++it) {
        const Vec gF = surface.gradF(x);
        const Vec r_tan = potential.grad_lapl(x) - lambda * gF;
        const double rF = surface.F(x);
        Eigen::VectorXd rhs(N + 1);
        rhs[0] = rF;
        rhs.tail(N) = r_tan;
        const double scale = std::max(1.0, potential.hess_lapl(x).norm());
        if (std::abs(rF) < surface.membership_tol(x) && r_tan.norm() < opts.newton_tol * scale) {
          ok = true;
          break;
        }
        Mat J = Mat::Zero(N + 1, N + 1);
        J.block(0, 0, 1, N) = gF.transpose();
        J.block(1, 0, N, N) = potential.hess_lapl(x) - lambda * surface.hessF(x);
        J.block(1, N, N, 1) = -gF;
        // minimal-norm step: rank-deficient along rotational continua
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
        cod.setThreshold(1e-10);
        Eigen::VectorXd step = cod.solve(-rhs);
        if (!step.allFinite() || step.norm() > 10.0) break;
        x += step.head(N);
        lambda += step[N];
      }
      if (ok)
        roots.emplace_back(x, lambda);
      else
        ++dropped;
    } catch (const std::exception&) {
      ++dropped;
    }
  }
  if (dropped_seeds) *dropped_seeds = dropped;

  // deterministic merge: sort lexicographically, dedup by distance
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    for (int j = 0; j < a.first.size(); ++j) {
      if (a.first[j] < b.first[j] - 1e-12) return true;
      if (a.first[j] > b.first[j] + 1e-12) return false;
    }
    return false;
  });
  std::vector<std::pair<Vec, double>> unique_roots;
  for (const auto& r : roots) {
    bool dup = false;
    for (const auto& u : unique_roots)
      if ((r.first - u.first).norm() < opts.dedup_distance) dup = true;
    if (!dup) unique_roots.push_back(r);
  }

  std::vector<PeakCandidate> out;
  for (const auto& r : unique_roots)
    out.push_back(build_candidate(surface, potential, r.first, r.second, opts.frame_seed));
  return out;
}

PeakCandidate& certify_nondegeneracy(const LevelSurface& surface, const Potential& potential,
                                     PeakCandidate& candidate) {
  const SurfaceScalars s = surface_scalar_derivatives(surface, potential, candidate.frame);
  candidate.witness_d2V_dnu2 = std::abs(s.d2V_dnu2);
  candidate.witness_det_hess_tau = std::abs(s.hess_tau_laplV.determinant());
  candidate.nondegenerate =
      candidate.witness_d2V_dnu2 > 1e-8 && candidate.witness_det_hess_tau > 1e-8;
  return candidate;
}

PeakCandidate& fill_uniqueness_matrix(const LevelSurface& surface, const Potential& potential,
                                      PeakCandidate& candidate) {
  const SurfaceScalars s = surface_scalar_derivatives(surface, potential, candidate.frame);
  Mat M = s.hess_tau_laplV;
  for (int j = 0; j < M.rows(); ++j) M(j, j) += s.dlaplV_dnu * candidate.frame.curvatures[j];
  candidate.uniqueness_matrix = M;
  candidate.uniqueness_det = M.determinant();
  return candidate;
}

Vec predict_drift(const PeakCandidate& candidate, double epsilon, const SolitonConstants& constants) {
  if (std::abs(candidate.d2V_dnu2) < 1e-10)
    throw ZeroNormalCurvatureOfV("d2V/dnu2 below threshold; drift formula undefined");
  const double coef =
      -constants.B / (2.0 * constants.a_star) * candidate.dlaplV_dnu / candidate.d2V_dnu2;
  return coef * epsilon * epsilon * candidate.frame.normal;
}

nlohmann::json candidates_to_json(const std::vector<PeakCandidate>& candidates) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : candidates) {
    nlohmann::json j;
    auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    j["b"] = vec(c.b);
    j["normal"] = vec(c.frame.normal);
    nlohmann::json tans = nlohmann::json::array();
    for (int col = 0; col < c.frame.tangent.cols(); ++col) tans.push_back(vec(c.frame.tangent.col(col)));
    j["tangent_frame"] = tans;
    j["curvatures"] = vec(c.frame.curvatures);
    j["v_at_b"] = c.v_at_b;
    j["laplV_at_b"] = c.laplV_at_b;
    j["tangential_grad_laplV"] = vec(c.tangential_grad_laplV);
    j["admissible"] = c.admissible;
    j["witness_d2V_dnu2"] = c.witness_d2V_dnu2;
    j["witness_det_hess_tau"] = c.witness_det_hess_tau;
    j["nondegenerate"] = c.nondegenerate;
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < c.uniqueness_matrix.rows(); ++r) {
      std::vector<double> row(c.uniqueness_matrix.cols());
      for (int cc = 0; cc < c.uniqueness_matrix.cols(); ++cc) row[cc] = c.uniqueness_matrix(r, cc);
      rows.push_back(row);
    }
    j["uniqueness_matrix"] = rows;
    j["uniqueness_det"] = c.uniqueness_det;
    j["dlaplV_dnu"] = c.dlaplV_dnu;
    j["d2V_dnu2"] = c.d2V_dnu2;
    j["lagrange_multiplier"] = c.lagrange_multiplier;
    arr.push_back(j);
  }
  return arr;
}

std::vector<PeakCandidate> candidates_from_json(const nlohmann::json& arr) {
  std::vector<PeakCandidate> out;
  auto vec = [](const nlohmann::json& j) {
    auto a = j.get<std::vector<double>>();
    Vec v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i];
    return v;
  };
  for (const auto& j : arr) {
    PeakCandidate c;
    c.b = vec(j.at("b"));
    c.frame.x = c.b;
    c.frame.normal = vec(j.at("normal"));
    const auto& tans = j.at("tangent_frame");
    c.frame.tangent = Mat(c.b.size(), tans.size());
    for (std::size_t col = 0; col < tans.size(); ++col) c.frame.tangent.col(col) = vec(tans[col]);
    c.frame.curvatures = vec(j.at("curvatures"));
    c.v_at_b = j.at("v_at_b").get<double>();
    c.laplV_at_b = j.at("laplV_at_b").get<double>();
    c.tangential_grad_laplV = vec(j.at("tangential_grad_laplV"));
    c.admissible = j.at("admissible").get<bool>();
    c.witness_d2V_dnu2 = j.at("witness_d2V_dnu2").get<double>();
    c.witness_det_hess_tau = j.at("witness_det_hess_tau").get<double>();
    c.nondegenerate = j.at("nondegenerate").get<bool>();
    const auto& rows = j.at("uniqueness_matrix");
    c.uniqueness_matrix = Mat(rows.size(), rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto row = rows[r].get<std::vector<double>>();
      for (std::size_t cc = 0; cc < row.size(); ++cc) c.uniqueness_matrix(r, cc) = row[cc];
    }
    c.uniqueness_det = j.at("uniqueness_det").get<double>();
    c.dlaplV_dnu = j.at("dlaplV_dnu").get<double>();
    c.d2V_dnu2 = j.at("d2V_dnu2").get<double>();
    c.lagrange_multiplier = j.at("lagrange_multiplier").get<double>();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace gplab
