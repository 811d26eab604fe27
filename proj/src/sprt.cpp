#include "gaitkit/sprt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaitkit/errors.hpp"
#include "gaitkit/mathutil.hpp"

namespace gaitkit {

namespace {

constexpr double kLogRatioClamp = 30.0;
constexpr double kLog2Pi = 1.8378770664093453;

} // namespace

double ScoreModel::log_density(double o) const {
    if (family == ScoreFamily::gaussian) {
        const double z = (o - mu) / sigma;
        return -0.5 * (z * z + kLog2Pi) - std::log(sigma);
    }
    // KDE: log of the mean Gaussian kernel, via log-sum-exp.
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(kde_points.size());
    for (std::size_t i = 0; i < kde_points.size(); ++i) {
        const double z = (o - kde_points[i]) / kde_bandwidth;
        terms[i] = -0.5 * z * z;
        max_term = std::max(max_term, terms[i]);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc) - std::log(static_cast<double>(kde_points.size())) -
           0.5 * kLog2Pi - std::log(kde_bandwidth);
}

void ScoreModel::validate() const {
    if (family == ScoreFamily::gaussian) {
        if (!(sigma > 0.0)) throw ValidationError("score model: sigma must be positive");
    } else {
        if (kde_points.empty()) throw ValidationError("score model: empty KDE sample set");
        if (!(kde_bandwidth > 0.0)) throw ValidationError("score model: bad KDE bandwidth");
    }
}

const char* score_family_name(ScoreFamily family) {
    return family == ScoreFamily::gaussian ? "gaussian" : "kde";
}

ScoreFamily score_family_from_name(const std::string& name) {
    if (name == "gaussian") return ScoreFamily::gaussian;
    if (name == "kde") return ScoreFamily::kde;
    throw ParameterError("score model: unknown family '" + name + "'");
}

ScoreModel fit_score_model(const std::vector<double>& scores, ScoreFamily family) {
    if (scores.size() < 30) {
        throw InsufficientDataError("fit_score_model: need at least 30 scores per class");
    }
    const double mu = mean_of(scores);
    const double var = variance_pop(scores);
    if (var <= 1e-12) throw DegenerateError("fit_score_model: zero-variance score class");
    const double sd = std::sqrt(var);

    ScoreModel m;
    m.family = family;
    m.mu = mu;
    m.sigma = sd;
    if (family == ScoreFamily::kde) {
        std::vector<double> sorted = scores;
        std::sort(sorted.begin(), sorted.end());
        const double q1 = sorted[sorted.size() / 4];
        const double q3 = sorted[(sorted.size() * 3) / 4];
        const double iqr = q3 - q1;
        double spread = sd;
        if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
        m.kde_points = scores;
        m.kde_bandwidth =
            0.9 * spread * std::pow(static_cast<double>(scores.size()), -0.2);
    }
    return m;
}

std::pair<ScoreModel, ScoreModel> fit_score_models(const std::vector<double>& pos_scores,
                                                   const std::vector<double>& neg_scores,
                                                   ScoreFamily family) {
    return {fit_score_model(pos_scores, family), fit_score_model(neg_scores, family)};
}

std::pair<double, double> wald_thresholds(double alpha_err, double beta_err) {
    if (!(alpha_err > 0.0 && alpha_err < 1.0) || !(beta_err > 0.0 && beta_err < 1.0)) {
        throw ParameterError("wald_thresholds: error probabilities must lie in (0,1)");
    }
    if (alpha_err + beta_err > 1.0) {
        throw ParameterError("wald_thresholds: alpha + beta must not exceed 1");
    }
    const double a = std::log(beta_err / (1.0 - alpha_err));
    const double b = std::log((1.0 - beta_err) / alpha_err);
    return {a, b};
}

SprtConfig make_sprt_config(double alpha_err, double beta_err, int max_cycles) {
    if (max_cycles < 1) throw ParameterError("sprt: max_cycles must be >= 1");
    SprtConfig cfg;
    cfg.alpha_err = alpha_err;
    cfg.beta_err = beta_err;
    std::tie(cfg.threshold_a, cfg.threshold_b) = wald_thresholds(alpha_err, beta_err);
    cfg.max_cycles = max_cycles;
    return cfg;
}

SprtState sprt_step(const SprtState& state, double score, const ScoreModel& p0,
                    const ScoreModel& p1, const SprtConfig& cfg) {
    if (state.decision != SprtDecision::pending) {
        throw UsageError("sprt_step: test already decided");
    }
    const double log_ratio =
        std::clamp(p1.log_density(score) - p0.log_density(score), -kLogRatioClamp, kLogRatioClamp);

    SprtState next;
    next.lambda = state.lambda + log_ratio;
    next.n = state.n + 1;
    if (next.lambda >= cfg.threshold_b) {
        next.decision = SprtDecision::accept_h1;
    } else if (next.lambda <= cfg.threshold_a) {
        next.decision = SprtDecision::accept_h0;
    } else if (next.n >= cfg.max_cycles) {
        next.decision = next.lambda > 0.0 ? SprtDecision::accept_h1 : SprtDecision::accept_h0;
    }
    return next;
}

SprtResult run_sprt(const std::vector<double>& scores, const ScoreModel& p0, const ScoreModel& p1,
                    const SprtConfig& cfg) {
    if (scores.empty()) throw InsufficientDataError("run_sprt: empty score stream");
    SprtResult result;
    SprtState state;
    for (double o : scores) {
        state = sprt_step(state, o, p0, p1, cfg);
        result.trace.push_back(state.lambda);
        if (state.decision != SprtDecision::pending) break;
    }
    if (state.decision == SprtDecision::pending) {
        // Stream exhausted: force the decision like the truncation rule.
        state.decision = state.lambda > 0.0 ? SprtDecision::accept_h1 : SprtDecision::accept_h0;
    }
    result.decision = state.decision;
    result.n_used = state.n;
    return result;
}

} // namespace gaitkit
