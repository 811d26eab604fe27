#pragma once

#include <string>
#include <vector>

#include "gaitkit/cnn.hpp"
#include "gaitkit/config.hpp"
#include "gaitkit/cycles.hpp"
#include "gaitkit/osvm.hpp"
#include "gaitkit/recording.hpp"
#include "gaitkit/sprt.hpp"

namespace gaitkit {

// Everything a deployed authenticator needs: the frozen feature extractor,
// the target's one-class model (with its feature selection), both score
// densities, and the sequential-test thresholds.
struct AuthProfile {
    CnnModel cnn;
    OsvmModel osvm;
    ScoreModel p1; // target
    ScoreModel p0; // impostor bank
    SprtConfig sprt;
};

struct PreprocessOutcome {
    std::vector<CycleMatrix> cycles;
    std::string subject_id;
    std::string session_id;
    SegmentationStats seg_stats;
    std::size_t dropped_degenerate = 0;
};

// Ingest -> cycles -> orientation -> normalized matrices for one recording.
// Cycles that fail a degeneracy check are dropped and counted; structural
// failures (too short, no gait) propagate as exceptions.
PreprocessOutcome preprocess_recording(const Recording& rec, const PipelineConfig& cfg);

// f vectors for a set of cycles under a frozen model.
std::vector<std::vector<double>> extract_feature_set(const std::vector<CycleMatrix>& cycles,
                                                     const CnnModel& model);

// PCA + OSVM score of a raw feature vector.
double score_feature(const OsvmModel& model, const std::vector<double>& f);

// Fit the target pipeline: feature selection and one-class boundary from the
// target's cycles, score densities from a held-out slice (p1) and from the
// impostor bank (p0).
AuthProfile enroll_target(const std::vector<CycleMatrix>& target_cycles,
                          const std::vector<CycleMatrix>& bank_cycles, const CnnModel& cnn,
                          const PipelineConfig& cfg);

struct AuthReport {
    SprtDecision decision = SprtDecision::pending;
    int n_used = 0;
    std::vector<double> trace;
    std::vector<double> scores; // per-cycle OSVM scores, walk order
};

AuthReport authenticate_recording(const Recording& rec, const AuthProfile& profile,
                                  const PipelineConfig& cfg);

} // namespace gaitkit
