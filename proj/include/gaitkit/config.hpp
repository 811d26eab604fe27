#pragma once

#include <cstdint>
#include <string>

#include "gaitkit/cnn.hpp"
#include "gaitkit/pca.hpp"
#include "gaitkit/sprt.hpp"

namespace gaitkit {

// Pipeline constants with their defaults; every field can be overridden by a
// key=value config file or a CLI flag.
struct PipelineConfig {
    double rate_hz = 200.0;
    double fir_cutoff_hz = 40.0;
    int fir_taps = 101;
    double cycle_cutoff_hz = 3.0; // low-pass for locating the first trough
    double phi_th = 0.3;
    int n_samples = 200; // N, samples per normalized cycle
    bool use_gyro = true;

    CnnArchitecture arch;   // classes filled in from the dataset
    TrainConfig train;

    double osvm_nu = 0.02;
    double osvm_gamma = 0.3;
    int pca_s = 20;
    PcaMode pca_mode = PcaMode::lowest;
    int enroll_max_cycles = 1000;

    double sprt_alpha = 0.01;
    double sprt_beta = 0.01;
    int sprt_max_cycles = 30;
    ScoreFamily score_family = ScoreFamily::gaussian;

    std::uint64_t seed = 1;

    // Apply one key=value override; unknown keys throw ParameterError.
    void set(const std::string& key, const std::string& value);
};

// Flat key=value file, '#' comments allowed.
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});

} // namespace gaitkit
