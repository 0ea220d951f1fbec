#pragma once

// Grid-variational oracle for the critical mass, independent of the radial
// shooting implementation: minimize the quotient
//     W(u) = ||grad u||^N ||u||^(4-N) / ||u||_4^4
// over an N-d finite-difference grid by normalized energy descent and map the
// minimum back to int Q^2 through the Pohozaev relations of the minimizer
// (grad2 = N a*/(4-N), q4 = 4 a*/(4-N)). Richardson extrapolation in h kills
// the leading O(h^2) bias.

#include <cmath>
#include <vector>

namespace weinstein {

struct Result {
  double quotient;
  double a_star;
};

inline double quotient_to_astar(int N, double w) {
  // a* = 4 W / ((4-N) (N/(4-N))^(N/2))
  return 4.0 * w / ((4.0 - N) * std::pow(static_cast<double>(N) / (4.0 - N), 0.5 * N));
}

// one resolution: n points per axis on [-L, L]^N, Dirichlet-like zero ghosts
inline double minimize_quotient(int N, int n, double L, int max_iter = 4000) {
  const double h = 2.0 * L / (n + 1);
  const long total = N == 2 ? static_cast<long>(n) * n : static_cast<long>(n) * n * n;
  std::vector<double> u(total), g(total), lap(total);

  auto idx2 = [n](long i, long j) { return i * n + j; };
  auto idx3 = [n](long i, long j, long k) { return (i * n + j) * n + k; };
  auto coord = [&](long i) { return -L + (i + 1) * h; };

  for (long f = 0; f < total; ++f) {
    double r2 = 0;
    if (N == 2) {
      const long i = f / n, j = f % n;
      r2 = coord(i) * coord(i) + coord(j) * coord(j);
    } else {
      const long i = f / (static_cast<long>(n) * n), j = (f / n) % n, k = f % n;
      r2 = coord(i) * coord(i) + coord(j) * coord(j) + coord(k) * coord(k);
    }
    u[f] = std::exp(-r2);
  }

  auto laplacian = [&](const std::vector<double>& in, std::vector<double>& out) {
    const double ih2 = 1.0 / (h * h);
    if (N == 2) {
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
          const double c = in[idx2(i, j)];
          const double xm = i > 0 ? in[idx2(i - 1, j)] : 0.0;
          const double xp = i + 1 < n ? in[idx2(i + 1, j)] : 0.0;
          const double ym = j > 0 ? in[idx2(i, j - 1)] : 0.0;
          const double yp = j + 1 < n ? in[idx2(i, j + 1)] : 0.0;
          out[idx2(i, j)] = (xm + xp + ym + yp - 4.0 * c) * ih2;
        }
    } else {
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
          for (long k = 0; k < n; ++k) {
            const double c = in[idx3(i, j, k)];
            const double xm = i > 0 ? in[idx3(i - 1, j, k)] : 0.0;
            const double xp = i + 1 < n ? in[idx3(i + 1, j, k)] : 0.0;
            const double ym = j > 0 ? in[idx3(i, j - 1, k)] : 0.0;
            const double yp = j + 1 < n ? in[idx3(i, j + 1, k)] : 0.0;
            const double zm = k > 0 ? in[idx3(i, j, k - 1)] : 0.0;
            const double zp = k + 1 < n ? in[idx3(i, j, k + 1)] : 0.0;
            out[idx3(i, j, k)] = (xm + xp + ym + yp + zm + zp - 6.0 * c) * ih2;
          }
    }
  };

  const double cell = std::pow(h, N);
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (long f = 0; f < total; ++f) s += a[f] * b[f];
    return s * cell;
  };

  // normalize ||u||_2 = 1 and descend f = (N/2) ln K - ln Q4, K = ||grad u||^2
  {
    const double m = std::sqrt(dot(u, u));
    for (double& v : u) v /= m;
  }
  double step = 0.1;
  double fprev = 1e300;
  for (int it = 0; it < max_iter; ++it) {
    laplacian(u, lap);
    double K = 0, Q4 = 0;
    for (long f = 0; f < total; ++f) {
      K += -u[f] * lap[f];
      Q4 += u[f] * u[f] * u[f] * u[f];
    }
    K *= cell;
    Q4 *= cell;
    const double fcur = 0.5 * N * std::log(K) - std::log(Q4);
    // gradient of f, projected onto the ||u|| = 1 sphere
    for (long f = 0; f < total; ++f)
      g[f] = 0.5 * N * (-2.0 * lap[f]) / K - 4.0 * u[f] * u[f] * u[f] / Q4;
    const double radial = dot(g, u);
    for (long f = 0; f < total; ++f) g[f] -= radial * u[f];
    double gnorm2 = 0;
    for (long f = 0; f < total; ++f) gnorm2 += g[f] * g[f];
    if (gnorm2 * cell < 1e-22) break;
    if (fcur > fprev) step *= 0.5;       // backtrack
    else step = std::min(step * 1.1, 2.0);
    fprev = fcur;
    for (long f = 0; f < total; ++f) u[f] -= step * g[f];
    const double m = std::sqrt(dot(u, u));
    for (double& v : u) v /= m;
  }
  laplacian(u, lap);
  double K = 0, Q4 = 0;
  for (long f = 0; f < total; ++f) {
    K += -u[f] * lap[f];
    Q4 += u[f] * u[f] * u[f] * u[f];
  }
  K *= cell;
  Q4 *= cell;
  return std::pow(K, 0.5 * N) / Q4;  // ||u||_2 = 1
}

inline Result critical_mass(int N) {
  const double L = N == 2 ? 9.0 : 8.0;
  const int n1 = N == 2 ? 180 : 72;
  const int n2 = 2 * n1;
  const double w1 = minimize_quotient(N, n1, L);
  const double w2 = minimize_quotient(N, n2, L);
  const double w = w2 + (w2 - w1) / 3.0;  // O(h^2) Richardson
  return {w, quotient_to_astar(N, w)};
}

}  // namespace weinstein
