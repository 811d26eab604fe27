#include "gaitkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaitkit/errors.hpp"

namespace gaitkit {

namespace {

double harmonic_sum(const double amp[3], const double phase[3], double omega_t) {
    double acc = 0.0;
    for (int h = 0; h < 3; ++h) {
        acc += amp[h] * std::cos(static_cast<double>(h + 1) * omega_t + phase[h]);
    }
    return acc;
}

double channel_skewness(const double amp[3], const double phase[3]) {
    constexpr int kGrid = 512;
    std::vector<double> v(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        v[static_cast<std::size_t>(i)] = harmonic_sum(amp, phase, 2.0 * M_PI * i / kGrid);
    }
    return skewness_of(v);
}

// How well-anchored the per-cycle magnitude trough is: the depth margin of
// the global minimum over the best competing local minimum elsewhere in the
// cycle, and the curvature of the well. Both must be healthy for the
// template anchor to survive sensor noise.
struct TroughQuality {
    double margin = 0.0;    // m/s^2, competing minimum minus global minimum
    double curvature = 0.0; // m/s^2 per s^2 at the global minimum
};

TroughQuality trough_quality(const SubjectProfile& p) {
    constexpr int kGrid = 1024;
    std::vector<double> mag(kGrid);
    int arg = 0;
    for (int i = 0; i < kGrid; ++i) {
        mag[static_cast<std::size_t>(i)] = p.body_accel(p.cycle_period_s * i / kGrid).norm();
        if (mag[static_cast<std::size_t>(i)] < mag[static_cast<std::size_t>(arg)]) arg = i;
    }
    const int guard = kGrid / 8; // ignore the global minimum's own basin
    double competing = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kGrid; ++i) {
        const int prev = (i + kGrid - 1) % kGrid;
        const int next = (i + 1) % kGrid;
        const bool local_min = mag[static_cast<std::size_t>(i)] <= mag[static_cast<std::size_t>(prev)] &&
                               mag[static_cast<std::size_t>(i)] <= mag[static_cast<std::size_t>(next)];
        const int dist = std::min(std::abs(i - arg), kGrid - std::abs(i - arg));
        if (local_min && dist > guard) {
            competing = std::min(competing, mag[static_cast<std::size_t>(i)]);
        }
    }
    const double h = p.cycle_period_s / kGrid;
    const int prev = (arg + kGrid - 1) % kGrid;
    const int next = (arg + 1) % kGrid;

    TroughQuality q;
    q.margin = std::isinf(competing) ? 10.0 : competing - mag[static_cast<std::size_t>(arg)];
    q.curvature = (mag[static_cast<std::size_t>(prev)] - 2.0 * mag[static_cast<std::size_t>(arg)] +
                   mag[static_cast<std::size_t>(next)]) /
                  (h * h);
    return q;
}

// Angle (radians) by which the principal axis of the horizontal oscillation
// deviates from the body-x direction.
double horizontal_tilt(const SubjectProfile& p) {
    constexpr int kGrid = 512;
    double var_x = 0.0, var_y = 0.0, cov = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        const double omega_t = 2.0 * M_PI * i / kGrid;
        const double x = harmonic_sum(p.accel_amp[0], p.accel_phase[0], omega_t);
        const double y = harmonic_sum(p.accel_amp[1], p.accel_phase[1], omega_t);
        var_x += x * x;
        var_y += y * y;
        cov += x * y;
    }
    return 0.5 * std::fabs(std::atan2(2.0 * cov, var_x - var_y));
}

// Location of the noiseless magnitude minimum within one period.
double find_trough(const SubjectProfile& p) {
    constexpr int kGrid = 4096;
    double best_t = 0.0;
    double best_v = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < kGrid; ++i) {
        const double t = p.cycle_period_s * i / kGrid;
        const double v = p.body_accel(t).norm();
        if (v < best_v) {
            best_v = v;
            best_t = t;
            best_i = i;
        }
    }
    // Parabolic refinement on the three neighboring grid values.
    const double h = p.cycle_period_s / kGrid;
    const double tm = p.cycle_period_s * ((best_i + kGrid - 1) % kGrid) / kGrid;
    const double tp = p.cycle_period_s * ((best_i + 1) % kGrid) / kGrid;
    const double fm = p.body_accel(tm).norm();
    const double fp = p.body_accel(tp).norm();
    const double denom = fm - 2.0 * best_v + fp;
    if (denom > 0.0) {
        const double shift = 0.5 * (fm - fp) / denom * h;
        best_t += std::clamp(shift, -h, h);
    }
    if (best_t < 0.0) best_t += p.cycle_period_s;
    return best_t;
}

} // namespace

Vec3 SubjectProfile::body_accel(double t) const {
    const double omega_t = 2.0 * M_PI * t / cycle_period_s;
    return {harmonic_sum(accel_amp[0], accel_phase[0], omega_t),
            harmonic_sum(accel_amp[1], accel_phase[1], omega_t),
            gravity + harmonic_sum(accel_amp[2], accel_phase[2], omega_t)};
}

Vec3 SubjectProfile::body_gyro(double t) const {
    const double omega_t = 2.0 * M_PI * t / cycle_period_s;
    return {harmonic_sum(gyro_amp[0], gyro_phase[0], omega_t),
            harmonic_sum(gyro_amp[1], gyro_phase[1], omega_t),
            harmonic_sum(gyro_amp[2], gyro_phase[2], omega_t)};
}

void SubjectProfile::validate() const {
    if (cycle_period_s < 0.8 || cycle_period_s > 1.6) {
        throw ValidationError("synth profile: period outside [0.8, 1.6] s");
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < 512; ++i) {
        const double m = body_accel(cycle_period_s * i / 512.0).norm();
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    if (lo < 2.0 || hi > 25.0) {
        throw ValidationError("synth profile: magnitude leaves [2, 25] m/s^2");
    }
}

SubjectProfile generate_subject(std::uint64_t seed) {
    Rng rng = Rng(seed).fork(0xface);

    SubjectProfile p;
    p.seed = seed;
    p.cycle_period_s = rng.uniform(0.8, 1.6);

    for (int attempt = 0;; ++attempt) {
        // Later attempts shrink the horizontal components toward a profile
        // whose magnitude trough is guaranteed unimodal.
        const double shrink = std::pow(0.85, attempt);

        // Vertical: fixed trough at phase 0 (phases near pi). The overtones
        // keep the per-cycle dip sharp, like a heel-strike transient.
        const double az1 = rng.uniform(2.2, 3.2);
        p.accel_amp[2][0] = az1;
        p.accel_amp[2][1] = az1 * rng.uniform(0.40, 0.60);
        p.accel_amp[2][2] = az1 * rng.uniform(0.15, 0.30);
        p.accel_phase[2][0] = M_PI;
        p.accel_phase[2][1] = M_PI + rng.uniform(-0.15, 0.15);
        p.accel_phase[2][2] = M_PI + rng.uniform(-0.15, 0.15);

        // Forward: anchored fundamental phase; overtone phases redrawn until
        // the waveform skewness is decisively positive, so the heading sign
        // rule resolves the same way under any device rotation.
        const double ax1 = shrink * rng.uniform(0.9, 1.6);
        p.accel_amp[0][0] = ax1;
        p.accel_amp[0][1] = ax1 * rng.uniform(0.35, 0.60);
        p.accel_amp[0][2] = ax1 * rng.uniform(0.05, 0.30);
        p.accel_phase[0][0] = 0.0;
        for (int skew_attempt = 0;; ++skew_attempt) {
            const double half_range = skew_attempt < 16 ? 1.0 : 0.4;
            p.accel_phase[0][1] = rng.uniform(-half_range, half_range);
            p.accel_phase[0][2] = rng.uniform(0.0, 2.0 * M_PI);
            double skew = channel_skewness(p.accel_amp[0], p.accel_phase[0]);
            if (skew < 0.0) {
                for (int h = 0; h < 3; ++h) p.accel_phase[0][h] += M_PI;
                skew = -skew;
            }
            if (skew >= 0.25 || skew_attempt >= 31) break;
        }

        // Lateral: clearly weaker than forward so the heading is unambiguous,
        // and in phase quadrature with it so the principal axis of the
        // horizontal motion stays on the forward direction.
        const double ay1 = ax1 * rng.uniform(0.20, 0.45);
        p.accel_amp[1][0] = ay1;
        p.accel_amp[1][1] = ay1 * rng.uniform(0.10, 0.40);
        p.accel_amp[1][2] = ay1 * rng.uniform(0.05, 0.30);
        for (int h = 0; h < 3; ++h) {
            p.accel_phase[1][h] = p.accel_phase[0][h] + M_PI / 2.0 + rng.uniform(-0.2, 0.2);
        }

        const TroughQuality q = trough_quality(p);
        if ((q.margin >= 0.8 && q.curvature >= 300.0 && horizontal_tilt(p) <= 0.035) ||
            attempt >= 24) {
            break;
        }
    }

    for (int axis = 0; axis < 3; ++axis) {
        const double g1 = rng.uniform(0.4, 2.0);
        p.gyro_amp[axis][0] = g1;
        p.gyro_amp[axis][1] = g1 * rng.uniform(0.1, 0.6);
        p.gyro_amp[axis][2] = g1 * rng.uniform(0.05, 0.4);
        for (int h = 0; h < 3; ++h) p.gyro_phase[axis][h] = rng.uniform(0.0, 2.0 * M_PI);
    }

    p.noise_std = 0.3;
    p.trough_phase_s = find_trough(p);
    p.validate();
    return p;
}

SynthWalk generate_walk(const SubjectProfile& profile, double duration_s, const Mat3& rotation,
                        double timing_jitter, std::uint64_t session) {
    if (duration_s < 5.0) throw ParameterError("generate_walk: duration must be >= 5 s");
    if (timing_jitter < 0.0 || timing_jitter >= 1.0) {
        throw ParameterError("generate_walk: timing jitter must lie in [0,1)");
    }
    if (!rotation.is_rotation(1e-6)) {
        throw ValidationError("generate_walk: rotation matrix is not orthonormal");
    }

    const double nominal_dt = 1.0 / 150.0;
    Rng base = Rng(profile.seed).fork(0xa110c + session);
    Rng clock_a = base.fork(1), clock_g = base.fork(2);
    Rng noise_a = base.fork(3), noise_g = base.fork(4);

    auto make_times = [&](Rng& rng) {
        std::vector<double> times;
        double t = 0.0;
        while (t < duration_s) {
            // Quantize to integer nanoseconds so the text format round-trips.
            times.push_back(std::round(t * 1e9) / 1e9);
            t += nominal_dt * (1.0 + timing_jitter * rng.uniform(-1.0, 1.0));
        }
        return times;
    };
    const auto t_accel = make_times(clock_a);
    const auto t_gyro = make_times(clock_g);

    // Oscillation means on the sampled grid, removed so the body-frame DC is
    // exactly (0, 0, gravity) for the accelerometer and zero for the gyro.
    Vec3 accel_dc{0, 0, 0}, gyro_dc{0, 0, 0};
    for (double t : t_accel) accel_dc = accel_dc + profile.body_accel(t);
    accel_dc = accel_dc * (1.0 / static_cast<double>(t_accel.size()));
    accel_dc.z -= profile.gravity;
    for (double t : t_gyro) gyro_dc = gyro_dc + profile.body_gyro(t);
    gyro_dc = gyro_dc * (1.0 / static_cast<double>(t_gyro.size()));

    SynthWalk walk;
    walk.recording.subject_id = "s" + std::to_string(profile.seed);
    walk.recording.session_id = "w" + std::to_string(session);

    for (double t : t_accel) {
        Vec3 body = profile.body_accel(t) - accel_dc;
        body.x += profile.noise_std * noise_a.normal();
        body.y += profile.noise_std * noise_a.normal();
        body.z += profile.noise_std * noise_a.normal();
        const Vec3 dev = rotation.apply(body);
        walk.recording.accel.push_back({t, dev.x, dev.y, dev.z});
    }
    const double gyro_noise = 0.1 * profile.noise_std;
    for (double t : t_gyro) {
        Vec3 body = profile.body_gyro(t) - gyro_dc;
        body.x += gyro_noise * noise_g.normal();
        body.y += gyro_noise * noise_g.normal();
        body.z += gyro_noise * noise_g.normal();
        const Vec3 dev = rotation.apply(body);
        walk.recording.gyro.push_back({t, dev.x, dev.y, dev.z});
    }

    walk.truth.device_rotation = rotation;
    walk.truth.subject_id = walk.recording.subject_id;
    for (double t = profile.trough_phase_s; t < duration_s; t += profile.cycle_period_s) {
        walk.truth.cycle_start_times.push_back(t);
    }
    return walk;
}

OsvmModel brute_force_osvm(const std::vector<std::vector<double>>& train, double nu,
                           double gamma_rbf, double kkt_tol) {
    const std::size_t l = train.size();
    if (l < 2) throw InsufficientDataError("brute_force_osvm: need at least 2 vectors");
    if (!(nu > 0.0 && nu <= 1.0)) throw ParameterError("brute_force_osvm: nu must lie in (0,1]");

    const double c = 1.0 / (nu * static_cast<double>(l));
    std::vector<double> q(l * l);
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < train[i].size(); ++k) {
                const double d = train[i][k] - train[j][k];
                d2 += d * d;
            }
            q[i * l + j] = std::exp(-gamma_rbf * d2);
        }
    }

    // Project v onto { 0 <= a <= C, sum a = 1 } by bisecting the shift.
    auto project = [&](std::vector<double>& v) {
        double lo = *std::min_element(v.begin(), v.end()) - c - 1.0;
        double hi = *std::max_element(v.begin(), v.end());
        for (int iter = 0; iter < 200; ++iter) {
            const double tau = 0.5 * (lo + hi);
            double sum = 0.0;
            for (double x : v) sum += std::clamp(x - tau, 0.0, c);
            (sum > 1.0 ? lo : hi) = tau;
        }
        const double tau = 0.5 * (lo + hi);
        for (double& x : v) x = std::clamp(x - tau, 0.0, c);
    };

    std::vector<double> alpha(l, 1.0 / static_cast<double>(l));
    std::vector<double> grad(l), next(l);
    const double step = 1.0 / static_cast<double>(l); // 1 / (upper bound on ||Q||)

    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < 2000000; ++iter) {
        for (std::size_t i = 0; i < l; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < l; ++j) acc += q[i * l + j] * alpha[j];
            grad[i] = acc;
        }
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        const double tau = 1e-10 * c;
        for (std::size_t i = 0; i < l; ++i) {
            if (alpha[i] < c - tau) g_min = std::min(g_min, grad[i]);
            if (alpha[i] > tau) g_max = std::max(g_max, grad[i]);
        }
        gap = g_max - g_min;
        if (gap <= kkt_tol) break;

        for (std::size_t i = 0; i < l; ++i) next[i] = alpha[i] - step * grad[i];
        project(next);
        alpha.swap(next);
    }
    if (gap > kkt_tol) {
        throw ConvergenceError("brute_force_osvm: projected gradient did not reach tolerance");
    }

    // Final gradient for the offset.
    for (std::size_t i = 0; i < l; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < l; ++j) acc += q[i * l + j] * alpha[j];
        grad[i] = acc;
    }
    const double tau = 1e-8 * c;
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < l; ++j) {
        if (alpha[j] > tau && alpha[j] < c - tau) {
            free_sum += grad[j];
            ++free_count;
        } else if (alpha[j] >= c - tau) {
            lower = std::max(lower, grad[j]);
        } else {
            upper = std::min(upper, grad[j]);
        }
    }
    double b;
    if (free_count > 0) b = free_sum / static_cast<double>(free_count);
    else if (std::isinf(lower)) b = upper;
    else if (std::isinf(upper)) b = lower;
    else b = 0.5 * (lower + upper);

    OsvmModel model;
    model.nu = nu;
    model.gamma_rbf = gamma_rbf;
    model.b = b;
    PcaTransform ident;
    ident.s_count = static_cast<int>(train.front().size());
    ident.f_count = ident.s_count;
    ident.mean.assign(static_cast<std::size_t>(ident.f_count), 0.0);
    ident.basis.assign(static_cast<std::size_t>(ident.f_count) * ident.f_count, 0.0);
    for (int i = 0; i < ident.f_count; ++i) {
        ident.basis[static_cast<std::size_t>(i) * ident.f_count + i] = 1.0;
    }
    ident.component_variances.assign(static_cast<std::size_t>(ident.f_count), 0.0);
    model.pca = ident;
    for (std::size_t j = 0; j < l; ++j) {
        if (alpha[j] > 1e-12) {
            model.support_vectors.push_back(train[j]);
            model.alphas.push_back(alpha[j]);
        }
    }
    return model;
}

} // namespace gaitkit
