#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "gplab/grid.hpp"
#include "gplab/soliton.hpp"
#include "support/weinstein.hpp"

using namespace gplab;

namespace {

const SolitonProfile& profile2() {
  static SolitonProfile p = compute_soliton(2, 1e-10);
  return p;
}
const SolitonProfile& profile3() {
  static SolitonProfile p = compute_soliton(3, 1e-10);
  return p;
}

double weighted_norm(const SolitonProfile& p, const std::vector<double>& f) {
  std::vector<double> f2(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) f2[i] = f[i] * f[i];
  return std::sqrt(radial_integral(p, f2));
}

// cubic interpolation of Q at arbitrary radius (test-side, for the scaling
// finite-difference oracle)
double q_interp(const SolitonProfile& p, double r) {
  const double t = r / p.spacing;
  const long n = static_cast<long>(p.values.size());
  const long i = static_cast<long>(std::floor(t));
  if (i >= n - 2) return 0.0;
  const double s = t - i;
  auto q = [&](long j) { return p.values[std::abs(j)]; };
  const double p0 = q(i - 1), p1 = q(i), p2 = q(i + 1), p3 = q(i + 2);
  return 0.5 * ((2 * p1) + (-p0 + p2) * s + (2 * p0 - 5 * p1 + 4 * p2 - p3) * s * s +
                (-p0 + 3 * p1 - 3 * p2 + p3) * s * s * s);
}

}  // namespace

TEST_CASE("pohozaev identities certify the 2-d profile") {
  const auto& p = profile2();
  const auto& c = p.constants;
  CHECK(std::abs(c.grad2 + c.a_star - c.q4) / c.q4 < 1e-8);
  CHECK(std::abs(2.0 * c.a_star - 1.0 * c.q4) / c.q4 < 1e-8);
  CHECK(std::abs((4 - 2) * c.q4 - 4 * c.a_star) / c.q4 < 1e-8);  // q4 = 2 a*
  CHECK(p.values[0] == doctest::Approx(p.shoot_center));
  CHECK(p.ode_residual < 1e-10);
}

TEST_CASE("pohozaev identities certify the 3-d profile") {
  const auto& p = profile3();
  const auto& c = p.constants;
  CHECK(std::abs(c.grad2 + c.a_star - c.q4) / c.q4 < 1e-8);
  CHECK(std::abs(1.0 * c.grad2 + 3.0 * c.a_star - 1.5 * c.q4) / c.q4 < 1e-8);
  CHECK(std::abs((4 - 3) * c.q4 - 4 * c.a_star) / c.q4 < 1e-8);  // q4 = 4 a*
  CHECK(p.ode_residual < 1e-10);
}

TEST_CASE("profile decays monotonically to the box edge") {
  for (const SolitonProfile* p : {&profile2(), &profile3()}) {
    for (std::size_t i = 1; i < p->values.size(); ++i) CHECK(p->values[i] < p->values[i - 1]);
    CHECK(p->values.back() < 1e-10);
    CHECK(p->values.back() > 0.0);
  }
}

TEST_CASE("critical mass matches the grid-variational oracle (2-d)") {
  const auto oracle = weinstein::critical_mass(2);
  const double a_star = profile2().constants.a_star;
  CHECK(std::abs(a_star - oracle.a_star) / a_star < 1e-3);
}

TEST_CASE("constants are positive and consistent with their definitions") {
  for (const SolitonProfile* p : {&profile2(), &profile3()}) {
    const SolitonConstants c = soliton_constants(*p);
    CHECK(c.a_star > 0);
    CHECK(c.B > 0);
    CHECK(c.q4 > 0);
    CHECK(c.grad2 > 0);
    // int |x|^2 Q^2 = N B by the definition of B
    std::vector<double> r2q2(p->values.size());
    for (std::size_t i = 0; i < r2q2.size(); ++i)
      r2q2[i] = p->radial_grid[i] * p->radial_grid[i] * p->values[i] * p->values[i];
    CHECK(radial_integral(*p, r2q2) == doctest::Approx(p->dim * c.B).epsilon(1e-10));
  }
}

TEST_CASE("scaling kernel field starts at Q(0) and pairs with Q^3 by parts") {
  for (const SolitonProfile* p : {&profile2(), &profile3()}) {
    const RadialField psi0 = scaling_kernel_field(*p);
    CHECK(psi0.values[0] == doctest::Approx(p->values[0]));
    // oracle: int Q^3 (x . grad Q) = -(N/4) int Q^4 by parts, so
    // int Q^3 psi0 = (1 - N/4) q4; checked by direct quadrature
    std::vector<double> integrand(psi0.values.size());
    for (std::size_t i = 0; i < integrand.size(); ++i)
      integrand[i] = std::pow(p->values[i], 3) * psi0.values[i];
    const double got = radial_integral(*p, integrand);
    const double expected = (1.0 - p->dim / 4.0) * p->constants.q4;
    CHECK(std::abs(got - expected) / std::abs(expected) < 1e-6);
  }
}

TEST_CASE("scaling kernel field equals the scaled-profile finite difference") {
  const auto& p = profile2();
  const RadialField psi0 = scaling_kernel_field(p);
  const double d = 1e-5;
  double max_err = 0, max_val = 0;
  for (std::size_t i = 0; i < p.radial_grid.size(); ++i) {
    const double r = p.radial_grid[i];
    if ((1 + d) * r > p.radial_grid.back() - 1.0) break;
    const double up = (1 + d) * q_interp(p, (1 + d) * r);
    const double dn = (1 - d) * q_interp(p, (1 - d) * r);
    max_err = std::max(max_err, std::abs((up - dn) / (2 * d) - psi0.values[i]));
    max_val = std::max(max_val, std::abs(psi0.values[i]));
  }
  CHECK(max_err < 1e-5 * max_val);
}

TEST_CASE("linearized operator reproduces L+ Q = -2 Q^3") {
  for (const SolitonProfile* p : {&profile2(), &profile3()}) {
    const RadialField out = apply_linearized(*p, p->make_field(p->values));
    double scale = 0;
    for (double q : p->values) scale = std::max(scale, std::abs(q * q * q));
    double err = 0;
    for (std::size_t i = 0; i < out.values.size(); ++i)
      err = std::max(err, std::abs(out.values[i] + 2.0 * std::pow(p->values[i], 3)));
    CHECK(err < 1e-6 * scale);
  }
}

TEST_CASE("linearized operator sends psi0 to -2Q") {
  for (const SolitonProfile* p : {&profile2(), &profile3()}) {
    const RadialField out = apply_linearized(*p, scaling_kernel_field(*p));
    double err = 0;
    for (std::size_t i = 0; i < out.values.size(); ++i)
      err = std::max(err, std::abs(out.values[i] + 2.0 * p->values[i]));
    CHECK(err < 1e-6 * p->values[0]);
  }
}

TEST_CASE("operators are linear: zero maps to zero") {
  const auto& p = profile2();
  const RadialField zero = p.make_field(std::vector<double>(p.values.size(), 0.0));
  for (double v : apply_linearized(p, zero).values) CHECK(v == 0.0);
  for (double v : apply_nonlocal_operator(p, zero).values) CHECK(v == 0.0);
}

TEST_CASE("psi0 spans the kernel of the nonlocal operator") {
  for (const SolitonProfile* p : {&profile2(), &profile3()}) {
    const RadialField psi0 = scaling_kernel_field(*p);
    const RadialField out = apply_nonlocal_operator(*p, psi0);
    CHECK(field_max_norm(out) < 1e-5 * field_max_norm(psi0));
  }
}

TEST_CASE("measured coercivity constant is positive and binds samples") {
  const auto& p = profile2();
  const double gamma = measure_coercivity(p);
  CHECK(gamma > 0.0);

  // smooth random fields, projected onto {<f,psi0>_w = 0, int Q^3 f = 0}
  const RadialField psi0 = scaling_kernel_field(p);
  std::vector<double> q3(p.values.size());
  for (std::size_t i = 0; i < q3.size(); ++i) q3[i] = std::pow(p.values[i], 3);
  auto wdot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) ab[i] = a[i] * b[i];
    return radial_integral(p, ab);
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.3, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> f(p.values.size());
    const double s1 = uni(rng), s2 = uni(rng), a2 = uni(rng) - 1.5;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double r = p.radial_grid[i];
      f[i] = std::exp(-r * r / (2 * s1 * s1)) + a2 * r * r * std::exp(-r * r / (2 * s2 * s2));
    }
    // impose both constraints by solving the 2x2 Gram system
    const double g11 = wdot(psi0.values, psi0.values), g12 = wdot(psi0.values, q3);
    const double g22 = wdot(q3, q3);
    const double b1 = wdot(f, psi0.values), b2 = wdot(f, q3);
    const double det = g11 * g22 - g12 * g12;
    const double c1 = (b1 * g22 - b2 * g12) / det, c2 = (g11 * b2 - g12 * b1) / det;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= c1 * psi0.values[i] + c2 * q3[i];
    CHECK(std::abs(wdot(f, psi0.values)) < 1e-8 * weighted_norm(p, f));
    CHECK(std::abs(wdot(f, q3)) < 1e-8 * weighted_norm(p, f));
    const RadialField out = apply_nonlocal_operator(p, p.make_field(f));
    const double ratio = weighted_norm(p, out.values) / weighted_norm(p, f);
    CHECK(ratio > 0.5 * gamma);
  }
}

TEST_CASE("cartesian linearized operator annihilates the translation mode") {
  const auto& p = profile2();
  const Grid g(2, 256, Boundary::Periodic, {12.8, 12.8, 12.8});
  SpectralWorkspace sw(g);
  std::vector<double> dq(g.total()), lap(g.total());
  double scale = 0;
  for (long i = 0; i < g.total(); ++i) {
    const Vec x = g.node(i);
    const double r = x.norm();
    const double qp = r > 1e-12 ? (q_interp(p, r + 5e-6) - q_interp(p, r - 5e-6)) / 1e-5 : 0.0;
    dq[i] = r > 1e-12 ? qp * x[0] / r : 0.0;
    scale = std::max(scale, std::abs(dq[i]));
  }
  sw.minus_laplacian(dq, lap);
  double err = 0;
  for (long i = 0; i < g.total(); ++i) {
    const double q = q_interp(p, g.node(i).norm());
    err = std::max(err, std::abs(lap[i] + (1.0 - 3.0 * q * q) * dq[i]));
  }
  CHECK(err < 1e-4 * scale);
}

TEST_CASE("halving the tolerance does not worsen certification residuals") {
  for (int dim : {2, 3}) {
    const SolitonProfile loose = compute_soliton(dim, 1e-6);
    const SolitonProfile tight = compute_soliton(dim, 1e-8);
    CHECK(tight.ode_residual <= loose.ode_residual * 1.05 + 1e-13);
    auto defect = [](const SolitonProfile& p) {
      const auto& c = p.constants;
      return std::abs(c.grad2 + c.a_star - c.q4) / c.q4;
    };
    CHECK(defect(tight) <= defect(loose) * 1.05 + 1e-13);
  }
}

TEST_CASE("profiles round-trip through csv plus sidecar") {
  const auto& p = profile2();
  const std::string csv = "/tmp/gplab_test_profile.csv";
  const std::string sidecar = "/tmp/gplab_test_profile.json";
  export_profile_csv(p, csv, sidecar);
  const SolitonProfile q = import_profile_csv(csv, sidecar);
  CHECK(q.dim == p.dim);
  CHECK(q.certified);
  CHECK(q.radial_grid.size() == p.radial_grid.size());
  CHECK(q.values[10] == doctest::Approx(p.values[10]).epsilon(1e-14));
  CHECK(q.constants.a_star == doctest::Approx(p.constants.a_star).epsilon(1e-14));
  CHECK(q.provenance == p.provenance);
  std::remove(csv.c_str());
  std::remove(sidecar.c_str());
}

TEST_CASE("domain guards reject bad inputs") {
  CHECK_THROWS_AS(compute_soliton(4, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(compute_soliton(2, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(compute_soliton(2, 0.0), std::invalid_argument);

  const auto& p2 = profile2();
  const auto& p3 = profile3();
  RadialField f3 = p3.make_field(std::vector<double>(p3.values.size(), 1.0));
  CHECK_THROWS_AS(apply_linearized(p2, f3), GridMismatch);

  SolitonProfile bad = p2;
  bad.certified = false;
  CHECK_THROWS_AS(soliton_constants(bad), UncertifiedProfile);
  CHECK_THROWS_AS(scaling_kernel_field(bad), UncertifiedProfile);
}
