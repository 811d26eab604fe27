#include "gaitkit/signal.hpp"

#include <algorithm>
#include <cmath>

#include "gaitkit/errors.hpp"
#include "gaitkit/spline.hpp"

namespace gaitkit {

namespace {

std::vector<double> uniform_grid(double t_first, double t_last, double rate_hz) {
    const std::size_t count =
        static_cast<std::size_t>(std::floor((t_last - t_first) * rate_hz + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k) grid[k] = t_first + static_cast<double>(k) / rate_hz;
    return grid;
}

UniformSignal resample_onto(const std::vector<ImuSample>& stream, const std::vector<double>& grid,
                            double rate_hz) {
    std::vector<double> t(stream.size());
    std::array<std::vector<double>, 3> axes;
    for (auto& a : axes) a.resize(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        t[i] = stream[i].t;
        axes[0][i] = stream[i].x;
        axes[1][i] = stream[i].y;
        axes[2][i] = stream[i].z;
    }
    UniformSignal out;
    out.rate_hz = rate_hz;
    for (int c = 0; c < 3; ++c) out.channels[c] = spline_resample(t, axes[c], grid);
    return out;
}

} // namespace

UniformSignal resample_uniform(const std::vector<ImuSample>& stream, double rate_hz) {
    if (rate_hz <= 0.0) throw ParameterError("resample_uniform: rate must be positive");
    if (stream.size() < 4) {
        throw InsufficientDataError("resample_uniform: need at least 4 samples for a cubic spline");
    }
    const auto grid = uniform_grid(stream.front().t, stream.back().t, rate_hz);
    if (grid.size() < static_cast<std::size_t>(rate_hz)) {
        throw InsufficientDataError("resample_uniform: need at least 1 s of data");
    }
    return resample_onto(stream, grid, rate_hz);
}

AlignedSignals resample_aligned(const Recording& rec, double rate_hz) {
    rec.validate();
    if (rec.accel.size() < 4 || rec.gyro.size() < 4) {
        throw InsufficientDataError("resample_aligned: need at least 4 samples per stream");
    }
    const double t_first = std::max(rec.accel.front().t, rec.gyro.front().t);
    const double t_last = std::min(rec.accel.back().t, rec.gyro.back().t);
    if (t_last - t_first < 1.0) {
        throw InsufficientDataError("resample_aligned: streams overlap for less than 1 s");
    }
    const auto grid = uniform_grid(t_first, t_last, rate_hz);
    AlignedSignals out;
    out.t0 = t_first;
    out.accel = resample_onto(rec.accel, grid, rate_hz);
    out.gyro = resample_onto(rec.gyro, grid, rate_hz);
    return out;
}

std::vector<double> fir_lowpass_taps(int n_taps, double cutoff_hz, double rate_hz) {
    if (n_taps < 3 || n_taps % 2 == 0) {
        throw ParameterError("fir_lowpass_taps: tap count must be odd and >= 3");
    }
    if (!(cutoff_hz > 0.0) || cutoff_hz >= rate_hz / 2.0) {
        throw ParameterError("fir_lowpass_taps: cutoff must lie in (0, rate/2)");
    }
    const double fc = cutoff_hz / rate_hz; // cycles per sample
    const int mid = n_taps / 2;
    std::vector<double> taps(n_taps);
    double sum = 0.0;
    for (int i = 0; i < n_taps; ++i) {
        const int k = i - mid;
        const double sinc =
            (k == 0) ? 2.0 * fc : std::sin(2.0 * M_PI * fc * k) / (M_PI * static_cast<double>(k));
        const double window = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (n_taps - 1));
        taps[i] = sinc * window;
        sum += taps[i];
    }
    for (double& t : taps) t /= sum; // unity DC gain
    return taps;
}

std::vector<double> fir_filter_zero_phase(const std::vector<double>& x,
                                          const std::vector<double>& taps) {
    const std::size_t n = x.size();
    const std::size_t L = taps.size();
    if (L % 2 == 0) throw ParameterError("fir_filter_zero_phase: even tap count");
    const std::size_t D = L / 2;
    if (n <= D) {
        throw InsufficientDataError("fir_filter_zero_phase: signal shorter than filter half-width");
    }

    // Reflect about the end samples (mirror without duplicating the edges).
    std::vector<double> padded(n + 2 * D);
    for (std::size_t i = 0; i < D; ++i) padded[i] = x[D - i];
    for (std::size_t i = 0; i < n; ++i) padded[D + i] = x[i];
    for (std::size_t i = 0; i < D; ++i) padded[D + n + i] = x[n - 2 - i];

    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const double* src = padded.data() + i;
        for (std::size_t m = 0; m < L; ++m) acc += taps[L - 1 - m] * src[m];
        y[i] = acc;
    }
    return y;
}

UniformSignal lowpass_fir(const UniformSignal& sig, double cutoff_hz, int n_taps) {
    const auto taps = fir_lowpass_taps(n_taps, cutoff_hz, sig.rate_hz);
    UniformSignal out;
    out.rate_hz = sig.rate_hz;
    for (int c = 0; c < 3; ++c) out.channels[c] = fir_filter_zero_phase(sig.channels[c], taps);
    return out;
}

void welch_psd_series(const std::vector<double>& x, double rate_hz, double window_s,
                      double overlap, std::vector<double>& freqs, std::vector<double>& power) {
    const std::size_t nseg = static_cast<std::size_t>(std::llround(window_s * rate_hz));
    if (nseg < 8) throw ParameterError("welch_psd: window too short");
    if (overlap < 0.0 || overlap >= 1.0) throw ParameterError("welch_psd: overlap must be in [0,1)");
    if (x.size() < nseg) throw InsufficientDataError("welch_psd: signal shorter than one window");

    const std::size_t hop =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(nseg * (1.0 - overlap))));
    const std::size_t n_bins = nseg / 2 + 1;

    // Periodic Hann window.
    std::vector<double> w(nseg);
    double u = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(nseg));
        u += w[i] * w[i];
    }

    // Direct DFT tables for the one-sided bins.
    std::vector<double> cos_t(n_bins * nseg), sin_t(n_bins * nseg);
    for (std::size_t k = 0; k < n_bins; ++k) {
        for (std::size_t i = 0; i < nseg; ++i) {
            const double ang = 2.0 * M_PI * static_cast<double>(k) * static_cast<double>(i) /
                               static_cast<double>(nseg);
            cos_t[k * nseg + i] = std::cos(ang);
            sin_t[k * nseg + i] = std::sin(ang);
        }
    }

    power.assign(n_bins, 0.0);
    std::vector<double> seg(nseg);
    std::size_t n_segments = 0;
    for (std::size_t start = 0; start + nseg <= x.size(); start += hop) {
        double mean = 0.0;
        for (std::size_t i = 0; i < nseg; ++i) mean += x[start + i];
        mean /= static_cast<double>(nseg);
        for (std::size_t i = 0; i < nseg; ++i) seg[i] = (x[start + i] - mean) * w[i];

        for (std::size_t k = 0; k < n_bins; ++k) {
            double re = 0.0, im = 0.0;
            const double* ck = cos_t.data() + k * nseg;
            const double* sk = sin_t.data() + k * nseg;
            for (std::size_t i = 0; i < nseg; ++i) {
                re += seg[i] * ck[i];
                im -= seg[i] * sk[i];
            }
            double p = (re * re + im * im) / (rate_hz * u);
            const bool interior = k != 0 && !(nseg % 2 == 0 && k == n_bins - 1);
            if (interior) p *= 2.0; // one-sided
            power[k] += p;
        }
        ++n_segments;
    }
    for (double& p : power) p /= static_cast<double>(n_segments);

    freqs.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        freqs[k] = static_cast<double>(k) * rate_hz / static_cast<double>(nseg);
    }
}

Spectrum welch_psd(const UniformSignal& sig, double window_s, double overlap) {
    Spectrum spec;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> power;
        welch_psd_series(sig.channels[c], sig.rate_hz, window_s, overlap, spec.freqs_hz, power);
        spec.power_db[c].resize(power.size());
        for (std::size_t k = 0; k < power.size(); ++k) {
            spec.power_db[c][k] = 10.0 * std::log10(std::max(power[k], 1e-300));
        }
    }
    return spec;
}

} // namespace gaitkit
