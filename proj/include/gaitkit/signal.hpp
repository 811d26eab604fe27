#pragma once

#include <array>
#include <vector>

#include "gaitkit/mathutil.hpp"
#include "gaitkit/recording.hpp"

namespace gaitkit {

// A tri-axial signal on a uniform time grid.
struct UniformSignal {
    double rate_hz = 0.0;
    TriSignal channels;

    std::size_t size() const { return channels[0].size(); }
};

struct Spectrum {
    std::vector<double> freqs_hz;
    std::array<std::vector<double>, 3> power_db;
};

// Cubic-spline resampling of one sensor stream onto a uniform grid covering
// [t_first, t_last]. Needs >= 4 samples and >= 1 s of data.
UniformSignal resample_uniform(const std::vector<ImuSample>& stream, double rate_hz = 200.0);

// Accelerometer and gyroscope resampled onto one shared grid starting at the
// later of the two stream starts, so per-cycle slicing uses one index space.
struct AlignedSignals {
    UniformSignal accel;
    UniformSignal gyro;
    double t0 = 0.0; // grid origin in recording time
};
AlignedSignals resample_aligned(const Recording& rec, double rate_hz = 200.0);

// Windowed-sinc low-pass design (Hamming window), DC gain exactly 1.
std::vector<double> fir_lowpass_taps(int n_taps, double cutoff_hz, double rate_hz);

// Apply a symmetric odd-length FIR with group-delay compensation and
// reflection padding; the overall response is zero-phase.
std::vector<double> fir_filter_zero_phase(const std::vector<double>& x,
                                          const std::vector<double>& taps);

UniformSignal lowpass_fir(const UniformSignal& sig, double cutoff_hz = 40.0, int n_taps = 101);

// Averaged periodogram over Hann windows (Welch), one-sided, reported in dB.
Spectrum welch_psd(const UniformSignal& sig, double window_s = 1.0, double overlap = 0.5);

// Welch on a single series; returns (freqs, linear power density).
void welch_psd_series(const std::vector<double>& x, double rate_hz, double window_s,
                      double overlap, std::vector<double>& freqs, std::vector<double>& power);

} // namespace gaitkit
