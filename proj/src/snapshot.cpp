#include "gplab/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

namespace gplab {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts unsupported");

void write_snapshot(const GPState& state, const std::string& bin_path,
                    const std::string& sidecar_json_path, const nlohmann::json& extra_meta) {
  std::ofstream f(bin_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + bin_path);
  const std::uint32_t dim = state.grid.dim, n = state.grid.n;
  f.write(reinterpret_cast<const char*>(&dim), 4);
  f.write(reinterpret_cast<const char*>(&n), 4);
  for (int ax = 0; ax < state.grid.dim; ++ax)
    f.write(reinterpret_cast<const char*>(&state.grid.half[ax]), 8);
  f.write(reinterpret_cast<const char*>(&state.lambda), 8);
  f.write(reinterpret_cast<const char*>(&state.mass_a), 8);
  f.write(reinterpret_cast<const char*>(state.w.data()), 8 * state.w.size());

  nlohmann::json j;
  j["boundary"] = state.grid.bc == Boundary::Periodic ? "periodic" : "dirichlet";
  nlohmann::json peaks = nlohmann::json::array();
  for (const auto& p : state.peaks)
    peaks.push_back({{"x", std::vector<double>(p.x.data(), p.x.data() + p.x.size())},
                     {"height", p.height}});
  j["peaks"] = peaks;
  j["residual_norm"] = state.residual_norm;
  j["pohozaev_residuals"] = state.pohozaev_residuals;
  j["extra"] = extra_meta;
  std::ofstream s(sidecar_json_path);
  if (!s) throw std::runtime_error("cannot open " + sidecar_json_path);
  s << j.dump(2) << '\n';
}

GPState read_snapshot(const std::string& bin_path, const std::string& sidecar_json_path) {
  std::ifstream f(bin_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + bin_path);
  std::uint32_t dim = 0, n = 0;
  f.read(reinterpret_cast<char*>(&dim), 4);
  f.read(reinterpret_cast<char*>(&n), 4);
  std::array<double, 3> half = {0, 0, 0};
  for (std::uint32_t ax = 0; ax < dim; ++ax) f.read(reinterpret_cast<char*>(&half[ax]), 8);
  GPState st;
  double lambda = 0, mass = 0;
  f.read(reinterpret_cast<char*>(&lambda), 8);
  f.read(reinterpret_cast<char*>(&mass), 8);

  std::ifstream s(sidecar_json_path);
  if (!s) throw std::runtime_error("cannot open " + sidecar_json_path);
  nlohmann::json j;
  s >> j;
  const Boundary bc =
      j.value("boundary", "periodic") == std::string("periodic") ? Boundary::Periodic : Boundary::Dirichlet;

  st.grid = Grid(static_cast<int>(dim), static_cast<int>(n), bc, half);
  st.lambda = lambda;
  st.mass_a = mass;
  st.w.resize(st.grid.total());
  f.read(reinterpret_cast<char*>(st.w.data()), 8 * st.w.size());
  if (!f) throw std::runtime_error("snapshot truncated: " + bin_path);

  st.residual_norm = j.value("residual_norm", 0.0);
  for (const auto& p : j.value("peaks", nlohmann::json::array())) {
    auto xv = p.at("x").get<std::vector<double>>();
    Vec x(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) x[i] = xv[i];
    st.peaks.push_back({x, p.at("height").get<double>()});
  }
  st.pohozaev_residuals = j.value("pohozaev_residuals", std::vector<double>{});
  return st;
}

void write_pgm_heatmap(const GPState& state, const std::string& path) {
  const Grid& g = state.grid;
  const int n = g.n;
  std::vector<double> slab(static_cast<std::size_t>(n) * n);
  if (g.dim == 2) {
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) slab[i * n + j] = state.w[g.index2(i, j)];
  } else {
    const long kmid = n / 2;
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) slab[i * n + j] = state.w[g.index3(i, j, kmid)];
  }
  double vmax = 0;
  for (double& v : slab) {
    v *= v;  // |u|^2 up to normalization
    vmax = std::max(vmax, v);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "P5\n" << n << " " << n << "\n255\n";
  for (double v : slab) {
    const unsigned char c = static_cast<unsigned char>(255.0 * (vmax > 0 ? v / vmax : 0.0));
    f.write(reinterpret_cast<const char*>(&c), 1);
  }
}

void write_csv_slice(const GPState& state, int axis, const std::string& path) {
  const Grid& g = state.grid;
  const int n = g.n;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.precision(16);
  f << "x,w\n";
  const long mid = n / 2;
  for (long i = 0; i < n; ++i) {
    long idx;
    if (g.dim == 2)
      idx = axis == 0 ? g.index2(i, mid) : g.index2(mid, i);
    else
      idx = axis == 0 ? g.index3(i, mid, mid) : (axis == 1 ? g.index3(mid, i, mid) : g.index3(mid, mid, i));
    f << g.coord(axis, i) << ',' << state.w[idx] << '\n';
  }
}

}  // namespace gplab
