#include "gaitkit/cycles.hpp"

#include <algorithm>
#include <cmath>

#include "gaitkit/errors.hpp"

namespace gaitkit {

namespace {

constexpr int kFirTaps = 101;
constexpr double kRefineHalfWidthS = 0.25;
constexpr double kMinCycleSeconds = 0.25;
constexpr double kMaxCycleSeconds = 2.5;

struct CenteredStats {
    double mean = 0.0;
    double ss = 0.0; // centered sum of squares
};

CenteredStats centered_stats(const double* v, std::size_t n) {
    CenteredStats s;
    for (std::size_t i = 0; i < n; ++i) s.mean += v[i];
    s.mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = v[i] - s.mean;
        s.ss += d * d;
    }
    return s;
}

bool is_constant(const CenteredStats& s, std::size_t n) {
    const double scale = std::fabs(s.mean) + 1.0;
    return s.ss <= n * 1e-24 * scale * scale;
}

double corr_dist_raw(const double* u, const CenteredStats& su, const double* v,
                     const CenteredStats& sv, std::size_t n) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += (u[i] - su.mean) * (v[i] - sv.mean);
    return 1.0 - dot / std::sqrt(su.ss * sv.ss);
}

// Streaming threshold search: feed phi values in index order; emits the argmin
// of each sub-threshold region once the region has been clear of the threshold
// for merge_gap consecutive samples (regions closer than that merge).
class SubThresholdScanner {
public:
    SubThresholdScanner(double threshold, std::size_t merge_gap)
        : threshold_(threshold), merge_gap_(merge_gap) {}

    std::optional<std::size_t> feed(std::size_t index, double phi) {
        if (phi < threshold_) {
            if (!in_region_ || phi < best_value_) {
                best_value_ = phi;
                best_index_ = index;
            }
            in_region_ = true;
            above_run_ = 0;
            return std::nullopt;
        }
        if (in_region_ && ++above_run_ >= merge_gap_) return take();
        return std::nullopt;
    }

    std::optional<std::size_t> flush() {
        if (in_region_) return take();
        return std::nullopt;
    }

private:
    std::optional<std::size_t> take() {
        in_region_ = false;
        above_run_ = 0;
        return best_index_;
    }

    double threshold_;
    std::size_t merge_gap_;
    bool in_region_ = false;
    std::size_t above_run_ = 0;
    double best_value_ = 0.0;
    std::size_t best_index_ = 0;
};

} // namespace

std::vector<double> magnitude(const TriSignal& channels) {
    const std::size_t n = channels[0].size();
    if (channels[1].size() != n || channels[2].size() != n) {
        throw ValidationError("magnitude: channel length mismatch");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::sqrt(channels[0][i] * channels[0][i] + channels[1][i] * channels[1][i] +
                           channels[2][i] * channels[2][i]);
    }
    return out;
}

double corr_dist(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw ValidationError("corr_dist: length mismatch");
    if (u.size() < 2) throw ValidationError("corr_dist: need at least 2 samples");
    const auto su = centered_stats(u.data(), u.size());
    const auto sv = centered_stats(v.data(), v.size());
    if (is_constant(su, u.size()) || is_constant(sv, v.size())) {
        throw DegenerateError("corr_dist: constant input has no correlation");
    }
    return corr_dist_raw(u.data(), su, v.data(), sv, u.size());
}

InitialTemplate initial_template(const std::vector<double>& a_mag, double rate_hz,
                                 double cutoff_hz) {
    const std::size_t n_s = static_cast<std::size_t>(std::llround(rate_hz));
    if (a_mag.size() < 3 * n_s) {
        throw InsufficientDataError("initial_template: need at least 3 s of magnitude data");
    }

    const auto taps = fir_lowpass_taps(kFirTaps, cutoff_hz, rate_hz);
    const auto smooth = fir_filter_zero_phase(a_mag, taps);

    const std::size_t half = n_s / 2;
    const std::size_t refine =
        static_cast<std::size_t>(std::llround(kRefineHalfWidthS * rate_hz));
    const std::size_t search_end = std::min(smooth.size() - 1, 3 * n_s);

    // Local minima of the smoothed magnitude within the first 3 s that leave
    // room for the centered 1 s template. Slow cadences push more than one
    // harmonic through the 3 Hz filter, so shallow mid-cycle dips show up as
    // minima too; the anchor is the deepest one (earliest among near-ties).
    std::size_t best = 0;
    bool found = false;
    double range_lo = smooth[0], range_hi = smooth[0];
    for (std::size_t i = 1; i < search_end; ++i) {
        range_lo = std::min(range_lo, smooth[i]);
        range_hi = std::max(range_hi, smooth[i]);
    }
    const double tie_tol = 0.01 * (range_hi - range_lo);
    for (std::size_t i = 1; i < search_end; ++i) {
        if (!(smooth[i] < smooth[i - 1])) continue;
        std::size_t j = i + 1;
        while (j < smooth.size() && smooth[j] == smooth[i]) ++j;
        if (j >= smooth.size() || !(smooth[j] > smooth[i])) continue;
        if (i < half || i + (n_s - half) + refine > a_mag.size()) continue;
        if (!found || smooth[i] < smooth[best] - tie_tol) {
            best = i;
            found = true;
        }
    }
    if (found) {
        const std::size_t lo = (best > refine) ? best - refine : 0;
        const std::size_t hi = std::min(a_mag.size() - 1, best + refine);
        std::size_t i_star = lo;
        for (std::size_t k = lo + 1; k <= hi; ++k) {
            if (a_mag[k] < a_mag[i_star]) i_star = k;
        }
        if (i_star >= half && i_star + (n_s - half) <= a_mag.size()) {
            InitialTemplate out;
            out.i_star = i_star;
            out.templ.values.assign(
                a_mag.begin() + static_cast<std::ptrdiff_t>(i_star - half),
                a_mag.begin() + static_cast<std::ptrdiff_t>(i_star - half + n_s));
            return out;
        }
    }
    throw NoGaitError("initial_template: no usable local minimum in the first 3 s");
}

std::vector<double> match_metric(const std::vector<double>& a_mag, const GaitTemplate& t) {
    const std::size_t n_s = t.values.size();
    if (a_mag.size() < n_s) throw InsufficientDataError("match_metric: signal shorter than template");

    const auto st = centered_stats(t.values.data(), n_s);
    const bool templ_const = is_constant(st, n_s);

    std::vector<double> phi(a_mag.size() - n_s + 1);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const auto sw = centered_stats(a_mag.data() + i, n_s);
        phi[i] = (templ_const || is_constant(sw, n_s))
                     ? 2.0
                     : corr_dist_raw(t.values.data(), st, a_mag.data() + i, sw, n_s);
    }
    return phi;
}

std::vector<std::size_t> find_cycle_starts(const std::vector<double>& phi, double phi_th,
                                           std::size_t n_s) {
    const std::size_t merge_gap = std::max<std::size_t>(1, n_s / 4);
    SubThresholdScanner scanner(phi_th, merge_gap);
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (auto m = scanner.feed(i, phi[i])) starts.push_back(*m);
    }
    if (auto m = scanner.flush()) starts.push_back(*m);
    return starts;
}

GaitTemplate update_template(const GaitTemplate& t, const GaitTemplate& t_prime, double alpha) {
    if (t.values.size() != t_prime.values.size()) {
        throw ValidationError("update_template: length mismatch");
    }
    GaitTemplate out;
    out.values.resize(t.values.size());
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        out.values[i] = alpha * t.values[i] + (1.0 - alpha) * t_prime.values[i];
    }
    return out;
}

std::vector<GaitCycle> segment_cycles(const UniformSignal& accel, const UniformSignal& gyro,
                                      double phi_th, double cycle_cutoff_hz,
                                      SegmentationStats* stats, SegmentationDiagnostics* diag) {
    if (accel.rate_hz != gyro.rate_hz) throw ValidationError("segment_cycles: rate mismatch");
    if (accel.size() != gyro.size()) throw ValidationError("segment_cycles: length mismatch");
    const double rate = accel.rate_hz;
    const std::size_t n = accel.size();
    const std::size_t n_s = static_cast<std::size_t>(std::llround(rate));
    if (n < 3 * n_s) throw NoCyclesError("segment_cycles: recording shorter than 3 s");

    const auto a_mag = magnitude(accel.channels);
    auto [templ, i_star] = initial_template(a_mag, rate, cycle_cutoff_hz);
    (void)i_star;

    const std::size_t merge_gap = std::max<std::size_t>(1, n_s / 4);
    const std::size_t window_count = n - n_s + 1;
    auto templ_stats = centered_stats(templ.values.data(), n_s);

    std::vector<std::size_t> minima;
    SubThresholdScanner scanner(phi_th, merge_gap);
    std::size_t i = 0;
    auto on_minimum = [&](std::size_t m) {
        minima.push_back(m);
        if (diag) diag->minima.push_back(m);
        // Refresh the template with the N_s samples starting at the minimum.
        GaitTemplate fresh;
        fresh.values.assign(a_mag.begin() + static_cast<std::ptrdiff_t>(m),
                            a_mag.begin() + static_cast<std::ptrdiff_t>(m + n_s));
        templ = update_template(templ, fresh);
        templ_stats = centered_stats(templ.values.data(), n_s);
        scanner = SubThresholdScanner(phi_th, merge_gap);
    };

    while (i < window_count) {
        const auto sw = centered_stats(a_mag.data() + i, n_s);
        const bool degen = is_constant(templ_stats, n_s) || is_constant(sw, n_s);
        const double phi =
            degen ? 2.0 : corr_dist_raw(templ.values.data(), templ_stats, a_mag.data() + i, sw, n_s);
        if (diag) diag->phi.push_back(phi);
        if (auto m = scanner.feed(i, phi)) on_minimum(*m);
        ++i;
    }
    if (auto m = scanner.flush()) on_minimum(*m);

    if (stats) stats->minima_found = minima.size();
    if (minima.size() < 3) {
        throw NoCyclesError("segment_cycles: fewer than 3 template minima found");
    }

    // Boundaries sit at the center of the matched window (the template anchor);
    // the cycle before the second minimum is discarded.
    const std::size_t half = n_s / 2;
    const std::size_t min_len = static_cast<std::size_t>(std::llround(kMinCycleSeconds * rate));
    const std::size_t max_len = static_cast<std::size_t>(std::llround(kMaxCycleSeconds * rate));

    std::vector<GaitCycle> cycles;
    for (std::size_t j = 1; j + 1 < minima.size(); ++j) {
        const std::size_t start = minima[j] + half;
        const std::size_t end = minima[j + 1] + half;
        const std::size_t len = end - start;
        if (len < min_len) {
            if (stats) ++stats->dropped_short;
            continue;
        }
        if (len > max_len) {
            if (stats) ++stats->dropped_long;
            continue;
        }
        GaitCycle c;
        c.start_index = start;
        c.end_index = end;
        for (int ch = 0; ch < 3; ++ch) {
            c.accel[ch].assign(accel.channels[ch].begin() + static_cast<std::ptrdiff_t>(start),
                               accel.channels[ch].begin() + static_cast<std::ptrdiff_t>(end));
            c.gyro[ch].assign(gyro.channels[ch].begin() + static_cast<std::ptrdiff_t>(start),
                              gyro.channels[ch].begin() + static_cast<std::ptrdiff_t>(end));
        }
        cycles.push_back(std::move(c));
    }
    if (cycles.empty()) throw NoCyclesError("segment_cycles: no plausible cycles survived");
    return cycles;
}

} // namespace gaitkit
