#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaitkit/mathutil.hpp"
#include "gaitkit/osvm.hpp"
#include "gaitkit/recording.hpp"

namespace gaitkit {

// Deterministic synthetic walker: three harmonics per channel in a body
// frame (x forward, y lateral, z vertical with gravity). The vertical
// channel is shaped so each cycle has one sharp magnitude trough; the
// forward channel is drawn with decisively positive skewness so the heading
// sign is stable across device rotations.
struct SubjectProfile {
    double cycle_period_s = 1.1;
    double accel_amp[3][3] = {};   // [axis][harmonic]
    double accel_phase[3][3] = {}; // radians
    double gyro_amp[3][3] = {};
    double gyro_phase[3][3] = {};
    double gravity = 9.81;      // m/s^2, along body z
    double noise_std = 0.3;     // accel noise; gyro noise is 0.1x
    std::uint64_t seed = 0;
    double trough_phase_s = 0.0; // location of the magnitude minimum in [0, period)

    Vec3 body_accel(double t) const; // noiseless, body frame, includes gravity
    Vec3 body_gyro(double t) const;
    void validate() const;
};

struct GroundTruth {
    std::vector<double> cycle_start_times; // magnitude-trough instants, seconds
    Mat3 device_rotation;
    std::string subject_id;
};

SubjectProfile generate_subject(std::uint64_t seed);

struct SynthWalk {
    Recording recording;
    GroundTruth truth;
};

// Jittered ~150 Hz sampling (separate accel/gyro clocks), body-frame noise,
// then rotation into the device frame. Deterministic in (profile, session).
SynthWalk generate_walk(const SubjectProfile& profile, double duration_s,
                        const Mat3& rotation = Mat3::identity(), double timing_jitter = 0.2,
                        std::uint64_t session = 0);

// Projected-gradient solver for the same one-class dual, for tiny instances;
// test oracle for the SMO path.
OsvmModel brute_force_osvm(const std::vector<std::vector<double>>& train, double nu,
                           double gamma_rbf, double kkt_tol = 1e-8);

} // namespace gaitkit
