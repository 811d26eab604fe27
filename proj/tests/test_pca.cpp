#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gaitkit/errors.hpp"
#include "gaitkit/pca.hpp"
#include "gaitkit/rng.hpp"
#include "test_support.hpp"

using namespace gaitkit;
using namespace gaitkit::testsupport;

namespace {

std::vector<std::vector<double>> diag_gaussian(const std::vector<double>& sigmas, int n,
                                               std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> out;
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(sigmas.size());
        for (std::size_t d = 0; d < sigmas.size(); ++d) v[d] = rng.normal(0.0, sigmas[d]);
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace

TEST_CASE("fit_pca on isotropic data returns an orthonormal pair") {
    const auto data = diag_gaussian({1.0, 1.0, 1.0}, 500, 3);
    const PcaTransform t = fit_pca(data, 2, PcaMode::lowest);
    t.validate(); // orthonormality of the basis rows
    CHECK(t.s_count == 2);
    CHECK(t.f_count == 3);
    // Retained variances are near 1 (isotropic input).
    for (double v : t.component_variances) CHECK(v == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("fit_pca lowest/highest select opposite ends of the spectrum") {
    const auto data = diag_gaussian({3.0, 2.0, 1.0}, 4000, 5); // variances 9, 4, 1

    const PcaTransform lo = fit_pca(data, 1, PcaMode::lowest);
    CHECK(std::fabs(lo.basis[2]) > 0.99); // +- e3
    CHECK(lo.basis[2] > 0.0);             // canonical sign: largest coordinate positive
    CHECK(lo.component_variances[0] == doctest::Approx(1.0).epsilon(0.15));

    const PcaTransform hi = fit_pca(data, 1, PcaMode::highest);
    CHECK(std::fabs(hi.basis[0]) > 0.99); // +- e1
    CHECK(hi.basis[0] > 0.0);
    CHECK(hi.component_variances[0] == doctest::Approx(9.0).epsilon(0.15));
}

TEST_CASE("fit_pca rejects rank-deficient covariances") {
    // Rank-1 data in 3 dimensions cannot support S=2 distinct components.
    Rng rng(7);
    std::vector<std::vector<double>> data;
    for (int i = 0; i < 50; ++i) {
        const double a = rng.normal();
        data.push_back({a, 2.0 * a, -a});
    }
    CHECK_THROWS_AS(fit_pca(data, 2, PcaMode::lowest), ValidationError);
}

TEST_CASE("fit_pca preconditions") {
    const auto data = diag_gaussian({1.0, 1.0, 1.0}, 3, 9); // too few samples
    CHECK_THROWS_AS(fit_pca(data, 2, PcaMode::lowest), InsufficientDataError);
    const auto enough = diag_gaussian({1.0, 1.0, 1.0}, 10, 9);
    CHECK_THROWS_AS(fit_pca(enough, 4, PcaMode::lowest), ParameterError);
}

TEST_CASE("pca_apply maps the mean to zero and the identity basis to itself") {
    const auto data = diag_gaussian({2.0, 1.0, 0.5}, 200, 11);
    const PcaTransform t = fit_pca(data, 3, PcaMode::highest);

    const auto zero = pca_apply(t, t.mean);
    for (double v : zero) CHECK(std::fabs(v) < 1e-12);

    PcaTransform ident;
    ident.s_count = 3;
    ident.f_count = 3;
    ident.mean.assign(3, 0.0);
    ident.basis = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    ident.component_variances.assign(3, 1.0);
    const std::vector<double> f{0.3, -1.2, 2.0};
    const auto same = pca_apply(ident, f);
    CHECK(max_abs_diff(same, f) < 1e-15);
}

TEST_CASE("pca_apply matches an independent projection") {
    const auto data = diag_gaussian({2.0, 1.5, 1.0, 0.5}, 400, 13);
    const PcaTransform t = fit_pca(data, 2, PcaMode::lowest);
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> f(4);
        for (auto& v : f) v = rng.normal(0.0, 2.0);
        const auto got = pca_apply(t, f);
        for (int r = 0; r < 2; ++r) {
            double want = 0.0;
            for (int c = 0; c < 4; ++c) {
                want += t.basis[static_cast<std::size_t>(r * 4 + c)] *
                        (f[static_cast<std::size_t>(c)] - t.mean[static_cast<std::size_t>(c)]);
            }
            CHECK(std::fabs(got[static_cast<std::size_t>(r)] - want) < 1e-12);
        }
    }
}

TEST_CASE("projected training variance equals the stored eigenvalues") {
    const auto data = diag_gaussian({2.5, 1.7, 0.9, 0.4}, 600, 19);
    for (PcaMode mode : {PcaMode::lowest, PcaMode::highest}) {
        const PcaTransform t = fit_pca(data, 3, mode);
        std::vector<std::vector<double>> projected;
        for (const auto& f : data) projected.push_back(pca_apply(t, f));
        for (int r = 0; r < 3; ++r) {
            std::vector<double> comp;
            for (const auto& p : projected) comp.push_back(p[static_cast<std::size_t>(r)]);
            CHECK(std::fabs(variance_sample(comp) -
                            t.component_variances[static_cast<std::size_t>(r)]) < 1e-6);
        }
    }
}

TEST_CASE("pca_apply is affine") {
    const auto data = diag_gaussian({2.0, 1.0, 0.5}, 300, 23);
    const PcaTransform t = fit_pca(data, 2, PcaMode::lowest);
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> f1(3), f2(3);
        for (auto& v : f1) v = rng.normal();
        for (auto& v : f2) v = rng.normal();
        const double a = rng.uniform(0.0, 1.0);
        std::vector<double> mix(3);
        for (int i = 0; i < 3; ++i) {
            mix[static_cast<std::size_t>(i)] = a * f1[static_cast<std::size_t>(i)] +
                                               (1.0 - a) * f2[static_cast<std::size_t>(i)];
        }
        const auto pm = pca_apply(t, mix);
        const auto p1 = pca_apply(t, f1);
        const auto p2 = pca_apply(t, f2);
        for (std::size_t i = 0; i < pm.size(); ++i) {
            CHECK(std::fabs(pm[i] - (a * p1[i] + (1.0 - a) * p2[i])) < 1e-9);
        }
    }
}

TEST_CASE("pca_apply rejects dimension mismatches") {
    const auto data = diag_gaussian({1.0, 1.0, 1.0}, 100, 31);
    const PcaTransform t = fit_pca(data, 2, PcaMode::lowest);
    CHECK_THROWS_AS(pca_apply(t, {1.0, 2.0}), ValidationError);
}
