#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gaitkit {

enum class ScoreFamily { gaussian, kde };

// Per-class density of OSVM scores: Gaussian MLE or a Gaussian-kernel KDE
// with Silverman bandwidth.
struct ScoreModel {
    ScoreFamily family = ScoreFamily::gaussian;
    double mu = 0.0;
    double sigma = 1.0;
    std::vector<double> kde_points;
    double kde_bandwidth = 0.0;

    double log_density(double o) const;
    void validate() const;
};

const char* score_family_name(ScoreFamily family);
ScoreFamily score_family_from_name(const std::string& name);

ScoreModel fit_score_model(const std::vector<double>& scores, ScoreFamily family);

// (p1, p0): target-class density first.
std::pair<ScoreModel, ScoreModel> fit_score_models(const std::vector<double>& pos_scores,
                                                   const std::vector<double>& neg_scores,
                                                   ScoreFamily family = ScoreFamily::gaussian);

// Wald approximations A = log(beta/(1-alpha)), B = log((1-beta)/alpha).
std::pair<double, double> wald_thresholds(double alpha_err, double beta_err);

enum class SprtDecision { pending, accept_h1, accept_h0 };

struct SprtConfig {
    double alpha_err = 0.01;
    double beta_err = 0.01;
    double threshold_a = 0.0; // accept H0 at or below
    double threshold_b = 0.0; // accept H1 at or above
    int max_cycles = 30;
};

SprtConfig make_sprt_config(double alpha_err, double beta_err, int max_cycles = 30);

struct SprtState {
    double lambda = 0.0; // running log-likelihood ratio
    int n = 0;
    SprtDecision decision = SprtDecision::pending;
};

// One accumulation step; per-cycle log-ratio clamped to +-30. At max_cycles
// an undecided test is forced by the sign of lambda (ties -> H0).
SprtState sprt_step(const SprtState& state, double score, const ScoreModel& p0,
                    const ScoreModel& p1, const SprtConfig& cfg);

struct SprtResult {
    SprtDecision decision = SprtDecision::pending;
    int n_used = 0;
    std::vector<double> trace; // lambda after each consumed score
};

// Folds sprt_step over the scores; a stream that ends undecided is forced by
// the sign of lambda, like the max_cycles rule.
SprtResult run_sprt(const std::vector<double>& scores, const ScoreModel& p0, const ScoreModel& p1,
                    const SprtConfig& cfg);

} // namespace gaitkit
