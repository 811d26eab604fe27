#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "gaitkit/errors.hpp"
#include "gaitkit/rng.hpp"
#include "gaitkit/sprt.hpp"

using namespace gaitkit;

namespace {

ScoreModel gaussian_model(double mu, double sigma) {
    ScoreModel m;
    m.family = ScoreFamily::gaussian;
    m.mu = mu;
    m.sigma = sigma;
    return m;
}

std::vector<double> draws(Rng& rng, double mu, double sigma, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.normal(mu, sigma);
    return v;
}

} // namespace

TEST_CASE("fit_score_model recovers Gaussian parameters") {
    Rng rng(3);
    const auto scores = draws(rng, 1.0, 1.0, 10000);
    const ScoreModel m = fit_score_model(scores, ScoreFamily::gaussian);
    CHECK(std::fabs(m.mu - 1.0) < 0.05);
    CHECK(std::fabs(m.sigma - 1.0) < 0.05);
}

TEST_CASE("fit_score_model preconditions") {
    Rng rng(5);
    const auto few = draws(rng, 0.0, 1.0, 20);
    CHECK_THROWS_AS(fit_score_model(few, ScoreFamily::gaussian), InsufficientDataError);
    const std::vector<double> flat(50, 0.7);
    CHECK_THROWS_AS(fit_score_model(flat, ScoreFamily::gaussian), DegenerateError);
}

TEST_CASE("KDE density is largest near its sample mass") {
    Rng rng(7);
    const auto scores = draws(rng, 0.0, 1.0, 200);
    const ScoreModel m = fit_score_model(scores, ScoreFamily::kde);
    CHECK(m.log_density(scores[0]) >= m.log_density(scores[0] + 5.0));
    CHECK(m.kde_bandwidth > 0.0);
}

TEST_CASE("identical score classes freeze the accumulator") {
    Rng rng(9);
    const auto scores = draws(rng, 0.5, 1.0, 100);
    const auto [p1, p0] = fit_score_models(scores, scores, ScoreFamily::gaussian);
    const SprtConfig cfg = make_sprt_config(0.01, 0.01, 5);

    const SprtResult r = run_sprt(draws(rng, 0.5, 1.0, 10), p0, p1, cfg);
    for (double l : r.trace) CHECK(l == doctest::Approx(0.0));
    CHECK(r.decision == SprtDecision::accept_h0); // forced at max_cycles, tie -> H0
    CHECK(r.n_used == 5);
}

TEST_CASE("wald_thresholds reference values") {
    {
        const auto [a, b] = wald_thresholds(0.5, 0.5);
        CHECK(a == 0.0);
        CHECK(b == 0.0);
    }
    {
        const auto [a, b] = wald_thresholds(0.01, 0.01);
        CHECK(std::fabs(a - (-4.59512)) < 1e-5);
        CHECK(std::fabs(b - 4.59512) < 1e-5);
    }
    {
        // Direct evaluation of A = log(beta/(1-alpha)), B = log((1-beta)/alpha).
        const auto [a, b] = wald_thresholds(0.001, 0.1);
        CHECK(a == doctest::Approx(std::log(0.1 / 0.999)).epsilon(1e-12));
        CHECK(std::fabs(a - (-2.3015851)) < 1e-5);
        CHECK(std::fabs(b - 6.8023948) < 1e-5);
    }
}

TEST_CASE("wald_thresholds rejects out-of-range inputs") {
    CHECK_THROWS_AS(wald_thresholds(0.0, 0.1), ParameterError);
    CHECK_THROWS_AS(wald_thresholds(0.1, 1.0), ParameterError);
    CHECK_THROWS_AS(wald_thresholds(0.6, 0.6), ParameterError);
}

TEST_CASE("thresholds bracket zero whenever alpha + beta < 1") {
    for (double alpha : {0.001, 0.05, 0.2, 0.4}) {
        for (double beta : {0.001, 0.05, 0.2, 0.4}) {
            const auto [a, b] = wald_thresholds(alpha, beta);
            CHECK(a < 0.0);
            CHECK(b > 0.0);
        }
    }
}

TEST_CASE("sprt_step accumulates unit log-ratios to the textbook decision point") {
    // With p1 = N(0.5, 1) and p0 = N(-0.5, 1) the log-ratio of a score o is o.
    const ScoreModel p1 = gaussian_model(0.5, 1.0);
    const ScoreModel p0 = gaussian_model(-0.5, 1.0);
    const SprtConfig cfg = make_sprt_config(0.01, 0.01, 30);

    const SprtResult r = run_sprt(std::vector<double>(10, 1.0), p0, p1, cfg);
    CHECK(r.decision == SprtDecision::accept_h1);
    CHECK(r.n_used == 5); // lambda hits 5 >= B = 4.59512 at the fifth cycle
    for (int i = 0; i < 5; ++i) CHECK(r.trace[static_cast<std::size_t>(i)] == doctest::Approx(i + 1.0));
}

TEST_CASE("a strongly negative first score rejects immediately") {
    const ScoreModel p1 = gaussian_model(0.5, 1.0);
    const ScoreModel p0 = gaussian_model(-0.5, 1.0);
    const SprtConfig cfg = make_sprt_config(0.01, 0.01, 30);
    SprtState state;
    state = sprt_step(state, -10.0, p0, p1, cfg);
    CHECK(state.decision == SprtDecision::accept_h0);
    CHECK(state.n == 1);
}

TEST_CASE("per-cycle log-ratios are clamped") {
    const ScoreModel p1 = gaussian_model(0.5, 1.0);
    const ScoreModel p0 = gaussian_model(-0.5, 1.0);
    SprtConfig cfg = make_sprt_config(0.01, 0.01, 30);
    cfg.threshold_b = 1e9; // keep it pending so we can read the trace
    SprtState state;
    state = sprt_step(state, 1e6, p0, p1, cfg);
    CHECK(state.lambda == doctest::Approx(30.0));
}

TEST_CASE("stepping a decided test is a usage error") {
    const ScoreModel p1 = gaussian_model(0.5, 1.0);
    const ScoreModel p0 = gaussian_model(-0.5, 1.0);
    const SprtConfig cfg = make_sprt_config(0.01, 0.01, 30);
    SprtState state;
    state = sprt_step(state, 100.0, p0, p1, cfg); // decides H1
    REQUIRE(state.decision == SprtDecision::accept_h1);
    CHECK_THROWS_AS(sprt_step(state, 1.0, p0, p1, cfg), UsageError);
}

TEST_CASE("run_sprt rejects an empty stream") {
    const ScoreModel p1 = gaussian_model(0.5, 1.0);
    const ScoreModel p0 = gaussian_model(-0.5, 1.0);
    const SprtConfig cfg = make_sprt_config(0.01, 0.01, 30);
    CHECK_THROWS_AS(run_sprt({}, p0, p1, cfg), InsufficientDataError);
}

TEST_CASE("the trace is the prefix sum of the per-cycle log ratios") {
    const ScoreModel p1 = gaussian_model(1.0, 0.8);
    const ScoreModel p0 = gaussian_model(-0.6, 1.3);
    SprtConfig cfg = make_sprt_config(0.01, 0.01, 50);
    cfg.threshold_a = -1e9;
    cfg.threshold_b = 1e9; // never decide: full trace

    Rng rng(13);
    const auto scores = draws(rng, 0.3, 1.0, 40);
    const SprtResult r = run_sprt(scores, p0, p1, cfg);
    REQUIRE(r.trace.size() == scores.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double ratio =
            std::clamp(p1.log_density(scores[i]) - p0.log_density(scores[i]), -30.0, 30.0);
        acc += ratio;
        CHECK(std::fabs(r.trace[i] - acc) < 1e-12);
    }
}

TEST_CASE("Monte Carlo error rates bracket the design values") {
    const ScoreModel p1 = gaussian_model(1.5, 1.0);
    const ScoreModel p0 = gaussian_model(-1.5, 1.0);
    const SprtConfig cfg = make_sprt_config(0.01, 0.01, 100);

    Rng rng(17);
    const int trials = 10000;
    int false_neg = 0, false_pos = 0;
    std::vector<int> cycles_h1;
    for (int i = 0; i < trials; ++i) {
        SprtState state;
        while (state.decision == SprtDecision::pending) {
            state = sprt_step(state, rng.normal(1.5, 1.0), p0, p1, cfg);
        }
        if (state.decision == SprtDecision::accept_h0) ++false_neg;
        cycles_h1.push_back(state.n);

        SprtState s0;
        while (s0.decision == SprtDecision::pending) {
            s0 = sprt_step(s0, rng.normal(-1.5, 1.0), p0, p1, cfg);
        }
        if (s0.decision == SprtDecision::accept_h1) ++false_pos;
    }
    CHECK(static_cast<double>(false_neg) / trials <= 0.02); // 2 * beta
    CHECK(static_cast<double>(false_pos) / trials <= 0.02); // 2 * alpha
    std::sort(cycles_h1.begin(), cycles_h1.end());
    CHECK(cycles_h1[cycles_h1.size() / 2] <= 5);
}

TEST_CASE("raising B never speeds up acceptance") {
    const ScoreModel p1 = gaussian_model(0.5, 1.0);
    const ScoreModel p0 = gaussian_model(-0.5, 1.0);
    Rng rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const auto scores = draws(rng, 0.8, 1.0, 200);
        SprtConfig narrow = make_sprt_config(0.05, 0.05, 200);
        SprtConfig wide = narrow;
        wide.threshold_b = narrow.threshold_b + 2.0;

        const SprtResult rn = run_sprt(scores, p0, p1, narrow);
        const SprtResult rw = run_sprt(scores, p0, p1, wide);
        if (rn.decision == SprtDecision::accept_h1 && rw.decision == SprtDecision::accept_h1) {
            CHECK(rw.n_used >= rn.n_used);
        }
    }
}
