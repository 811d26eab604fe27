#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "gaitkit/eval.hpp"
#include "gaitkit/errors.hpp"

using namespace gaitkit;

namespace {

// Desk-scale network so the sweep protocols stay fast.
PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.seed = 9;
    cfg.train.seed = 9;
    cfg.arch.cl1_kernels = 4;
    cfg.arch.cl2_kernels = 6;
    cfg.arch.features = 12;
    cfg.train.learning_rate = 0.03;
    cfg.train.max_epochs = 80;
    cfg.train.test_per_class = 30;
    cfg.pca_s = 6;
    return cfg;
}

} // namespace

TEST_CASE("csv writer emits a header and g-formatted rows") {
    CsvTable t;
    t.columns = {"a", "b"};
    t.rows = {{1.0, 0.25}, {2.0, 0.125}};
    std::ostringstream out;
    write_csv(out, t);
    CHECK(out.str() == "a,b\n1,0.25\n2,0.125\n");
}

TEST_CASE("synth_cycle_dataset labels subjects by position") {
    PipelineConfig cfg;
    const auto data = synth_cycle_dataset(cfg, {100, 101}, 1, 30.0, true);
    REQUIRE(!data.empty());
    std::set<int> labels;
    for (const auto& c : data) {
        REQUIRE(c.subject_label.has_value());
        labels.insert(*c.subject_label);
        CHECK(c.n_rows() == 8);
        CHECK(c.n_cols == 200);
    }
    CHECK(labels == std::set<int>{0, 1});
}

TEST_CASE("nc-sweep accuracy is non-decreasing within the noise band") {
    PipelineConfig cfg = small_config();
    cfg.train.train_per_class = 40; // upper bound across the sweep
    const CsvTable t = eval_nc_sweep(cfg, {5, 10, 20, 40});
    REQUIRE(t.rows.size() == 4);
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        CHECK(t.rows[i][1] >= t.rows[i - 1][1] - 0.03);
    }
    // The biggest training set should classify the easy synthetic cohort well.
    CHECK(t.rows.back()[1] >= 0.85);
}

TEST_CASE("gyro ablation: adding the gyroscope does not hurt") {
    PipelineConfig cfg = small_config();
    cfg.train.train_per_class = 30;
    const CsvTable t = eval_gyro_ablation(cfg);
    REQUIRE(t.rows.size() == 2);
    const double with_gyro = t.rows[0][1];
    const double without = t.rows[1][1];
    CHECK(with_gyro >= without - 0.01);
}

TEST_CASE("nu-gamma grid has a contiguous high-F-measure plateau") {
    PipelineConfig cfg = small_config();
    cfg.train.train_per_class = 30;
    const std::vector<double> gammas{0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
    const std::vector<double> nus{0.01, 0.02, 0.05, 0.1, 0.15, 0.2};
    const CsvTable t = eval_nu_gamma_grid(cfg, gammas, nus);
    REQUIRE(t.rows.size() == gammas.size() * nus.size());

    // Grid of F-measures indexed [gamma][nu].
    std::map<std::pair<double, double>, double> f;
    double best = 0.0;
    std::pair<double, double> best_cell;
    for (const auto& row : t.rows) {
        f[{row[0], row[1]}] = row[2];
        if (row[2] > best) {
            best = row[2];
            best_cell = {row[0], row[1]};
        }
    }
    REQUIRE(best > 0.0);

    // Flood fill from the best cell across neighbors above 80% of the peak.
    auto qualifies = [&](std::size_t gi, std::size_t ni) {
        return f[{gammas[gi], nus[ni]}] >= 0.8 * best;
    };
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        for (std::size_t ni = 0; ni < nus.size(); ++ni) {
            if (gammas[gi] == best_cell.first && nus[ni] == best_cell.second) {
                stack.push_back({gi, ni});
            }
        }
    }
    while (!stack.empty()) {
        const auto [gi, ni] = stack.back();
        stack.pop_back();
        if (seen.count({gi, ni}) || !qualifies(gi, ni)) continue;
        seen.insert({gi, ni});
        if (gi > 0) stack.push_back({gi - 1, ni});
        if (gi + 1 < gammas.size()) stack.push_back({gi + 1, ni});
        if (ni > 0) stack.push_back({gi, ni - 1});
        if (ni + 1 < nus.size()) stack.push_back({gi, ni + 1});
    }
    CHECK(static_cast<double>(seen.size()) >=
          0.25 * static_cast<double>(gammas.size() * nus.size()));
}

TEST_CASE("s-sweep and enroll-sweep produce well-formed tables") {
    PipelineConfig cfg = small_config();
    cfg.train.train_per_class = 30;
    const CsvTable s = eval_s_sweep(cfg, {4, 8, 12});
    REQUIRE(s.rows.size() == 3);
    for (const auto& row : s.rows) {
        CHECK(row[1] >= 0.0);
        CHECK(row[1] <= 1.0);
        CHECK(row[2] >= 0.0);
        CHECK(row[2] <= 1.0);
    }

    const CsvTable e = eval_enroll_sweep(cfg, {40, 160});
    REQUIRE(e.rows.size() == 2);
    for (const auto& row : e.rows) {
        CHECK(row[1] >= 0.0);
        CHECK(row[1] <= 1.0);
    }
}

TEST_CASE("sprt-curves report sane error rates and delays") {
    PipelineConfig cfg = small_config();
    cfg.train.train_per_class = 30;
    const CsvTable t = eval_sprt_curves(cfg, {0.01, 0.1});
    REQUIRE(t.rows.size() == 2);
    for (const auto& row : t.rows) {
        CHECK(row[1] >= 0.0);
        CHECK(row[1] <= 0.5);
        CHECK(row[2] >= 0.0);
        CHECK(row[2] <= 0.5);
        CHECK(row[3] >= 1.0);
    }
}

TEST_CASE("unknown protocols are parameter errors") {
    PipelineConfig cfg;
    CHECK_THROWS_AS(run_eval_protocol("bogus", cfg), ParameterError);
}
