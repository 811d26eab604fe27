#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaitkit/orientation.hpp"

namespace gaitkit {

// Fixed-size standardized network input. Row order with gyro enabled:
// a_xi, a_psi, a_zeta, a_mag, g_xi, g_psi, g_zeta, g_mag; without it, the
// four accelerometer rows only. Every row has zero mean and unit
// (population) variance.
struct CycleMatrix {
    std::vector<std::vector<double>> rows;
    int n_cols = 200;
    std::optional<int> subject_label;
    std::string session_id;

    int n_rows() const { return static_cast<int>(rows.size()); }
};

// Elementwise magnitudes recomputed from the oriented components; equal to
// the smartphone-frame magnitudes because the frame is orthonormal.
std::pair<std::vector<double>, std::vector<double>> magnitudes(const OrientedCycle& oc);

// Cubic-spline resample onto n uniformly spaced points over the cycle's
// index span, endpoints preserved.
std::vector<double> resample_cycle(const std::vector<double>& v, int n = 200);

// (v - mean) / std with population variance; constant rows are degenerate.
std::vector<double> zscore(const std::vector<double>& v);

CycleMatrix assemble_input(const OrientedCycle& oc, bool use_gyro = true, int n = 200);

} // namespace gaitkit
