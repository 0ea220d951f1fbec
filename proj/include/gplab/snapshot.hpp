#pragma once

#include <string>

#include "gplab/gp_solver.hpp"

namespace gplab {

/// Binary snapshot: little-endian header (u32 dim, u32 n, f64 box half-width
/// per axis, f64 lambda, f64 mass_a) followed by row-major f64 field samples.
/// The JSON sidecar carries boundary mode, peaks and diagnostics.
void write_snapshot(const GPState& state, const std::string& bin_path,
                    const std::string& sidecar_json_path,
                    const nlohmann::json& extra_meta = nlohmann::json::object());
GPState read_snapshot(const std::string& bin_path, const std::string& sidecar_json_path);

/// Grayscale P5 heatmap of |u|^2 (central z-slice in 3-D).
void write_pgm_heatmap(const GPState& state, const std::string& path);

/// Axis-aligned slice through the box center as CSV (coordinate, w).
void write_csv_slice(const GPState& state, int axis, const std::string& path);

}  // namespace gplab
