#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gaitkit/mathutil.hpp"
#include "gaitkit/signal.hpp"

namespace gaitkit {

// One-second accelerometer-magnitude snippet used to locate cycle boundaries.
struct GaitTemplate {
    std::vector<double> values; // length N_s = samples per second
};

// One walking cycle in smartphone coordinates.
struct GaitCycle {
    TriSignal accel; // 3 x n_k
    TriSignal gyro;  // 3 x n_k
    std::size_t start_index = 0;
    std::size_t end_index = 0;

    std::size_t length() const { return accel[0].size(); }
};

struct SegmentationStats {
    std::size_t minima_found = 0;
    std::size_t dropped_short = 0;
    std::size_t dropped_long = 0;
};

struct SegmentationDiagnostics {
    std::vector<double> phi;           // match metric as scanned (template evolves)
    std::vector<std::size_t> minima;   // accepted minima, phi index space
};

// out(i) = sqrt(x_i^2 + y_i^2 + z_i^2)
std::vector<double> magnitude(const TriSignal& channels);

// 1 - Pearson correlation; throws DegenerateError for constant inputs.
double corr_dist(const std::vector<double>& u, const std::vector<double>& v);

// First template: refine the first minimum of the 3 Hz-filtered magnitude on
// the raw magnitude, then take the 1 s window centered there.
struct InitialTemplate {
    GaitTemplate templ;
    std::size_t i_star = 0;
};
InitialTemplate initial_template(const std::vector<double>& a_mag, double rate_hz,
                                 double cutoff_hz = 3.0);

// phi(i) = corr_dist(T, a_mag[i .. i+N_s)); constant windows score 2.
std::vector<double> match_metric(const std::vector<double>& a_mag, const GaitTemplate& t);

// One index per contiguous sub-threshold region of phi (the region argmin);
// regions closer than 0.25 * N_s are merged. N_s is the template length.
std::vector<std::size_t> find_cycle_starts(const std::vector<double>& phi, double phi_th,
                                           std::size_t n_s);

GaitTemplate update_template(const GaitTemplate& t, const GaitTemplate& t_prime,
                             double alpha = 0.9);

// Full iterative segmentation: initial template, threshold search for the
// match-metric minima with exponential template refresh, cycles emitted
// between consecutive minima starting from the second one. Cycle boundaries
// are reported at the center of the matched window (the template anchor).
std::vector<GaitCycle> segment_cycles(const UniformSignal& accel, const UniformSignal& gyro,
                                      double phi_th = 0.3, double cycle_cutoff_hz = 3.0,
                                      SegmentationStats* stats = nullptr,
                                      SegmentationDiagnostics* diag = nullptr);

} // namespace gaitkit
