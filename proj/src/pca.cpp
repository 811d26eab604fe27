#include "gaitkit/pca.hpp"

#include <algorithm>
#include <cmath>

#include "gaitkit/errors.hpp"
#include "gaitkit/mathutil.hpp"

namespace gaitkit {

void PcaTransform::validate() const {
    if (s_count < 1 || f_count < 1 || s_count > f_count) {
        throw ValidationError("pca: invalid dimensions");
    }
    if (mean.size() != static_cast<std::size_t>(f_count) ||
        basis.size() != static_cast<std::size_t>(s_count) * f_count ||
        component_variances.size() != static_cast<std::size_t>(s_count)) {
        throw ValidationError("pca: array sizes inconsistent with S/F");
    }
    for (int r = 0; r < s_count; ++r) {
        for (int r2 = r; r2 < s_count; ++r2) {
            double dot = 0.0;
            for (int c = 0; c < f_count; ++c) {
                dot += basis[static_cast<std::size_t>(r) * f_count + c] *
                       basis[static_cast<std::size_t>(r2) * f_count + c];
            }
            const double want = (r == r2) ? 1.0 : 0.0;
            if (std::fabs(dot - want) > 1e-8) {
                throw ValidationError("pca: basis rows not orthonormal");
            }
        }
    }
}

const char* pca_mode_name(PcaMode mode) {
    return mode == PcaMode::lowest ? "lowest" : "highest";
}

PcaMode pca_mode_from_name(const std::string& name) {
    if (name == "lowest") return PcaMode::lowest;
    if (name == "highest") return PcaMode::highest;
    throw ParameterError("pca: unknown mode '" + name + "'");
}

PcaTransform fit_pca(const std::vector<std::vector<double>>& features, int s_count, PcaMode mode) {
    if (features.empty()) throw InsufficientDataError("fit_pca: no samples");
    const int f = static_cast<int>(features.front().size());
    if (s_count < 1 || s_count > f) throw ParameterError("fit_pca: S must lie in [1, F]");
    if (features.size() < static_cast<std::size_t>(f) + 1) {
        throw InsufficientDataError("fit_pca: need at least F+1 samples");
    }
    for (const auto& v : features) {
        if (static_cast<int>(v.size()) != f) throw ValidationError("fit_pca: ragged feature set");
    }

    const double n = static_cast<double>(features.size());
    std::vector<double> mean(static_cast<std::size_t>(f), 0.0);
    for (const auto& v : features) {
        for (int i = 0; i < f; ++i) mean[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
    }
    for (double& m : mean) m /= n;

    std::vector<double> cov(static_cast<std::size_t>(f) * f, 0.0);
    for (const auto& v : features) {
        for (int r = 0; r < f; ++r) {
            const double dr = v[static_cast<std::size_t>(r)] - mean[static_cast<std::size_t>(r)];
            for (int c = r; c < f; ++c) {
                cov[static_cast<std::size_t>(r) * f + c] +=
                    dr * (v[static_cast<std::size_t>(c)] - mean[static_cast<std::size_t>(c)]);
            }
        }
    }
    for (int r = 0; r < f; ++r) {
        for (int c = r; c < f; ++c) {
            const double val = cov[static_cast<std::size_t>(r) * f + c] / (n - 1.0);
            cov[static_cast<std::size_t>(r) * f + c] = val;
            cov[static_cast<std::size_t>(c) * f + r] = val;
        }
    }

    std::vector<double> evals, evecs;
    jacobi_eigen_sym(static_cast<std::size_t>(f), cov, evals, evecs); // descending

    const double lambda_max = std::max(evals.front(), 0.0);
    int rank = 0;
    for (double v : evals) {
        if (v > 1e-10 * std::max(lambda_max, 1e-300)) ++rank;
    }
    if (rank < s_count) {
        throw ValidationError("fit_pca: covariance rank " + std::to_string(rank) +
                              " leaves fewer than S=" + std::to_string(s_count) +
                              " distinct components");
    }

    PcaTransform t;
    t.s_count = s_count;
    t.f_count = f;
    t.mode = mode;
    t.mean = std::move(mean);
    t.basis.resize(static_cast<std::size_t>(s_count) * f);
    t.component_variances.resize(static_cast<std::size_t>(s_count));

    // Components ordered by increasing variance in `lowest` mode, decreasing
    // in `highest` mode; most characteristic first either way.
    for (int r = 0; r < s_count; ++r) {
        const int col = (mode == PcaMode::lowest) ? (f - 1 - r) : r;
        t.component_variances[static_cast<std::size_t>(r)] = evals[static_cast<std::size_t>(col)];
        double* row = t.basis.data() + static_cast<std::ptrdiff_t>(r) * f;
        for (int i = 0; i < f; ++i) row[i] = evecs[static_cast<std::size_t>(i) * f + col];
        // Canonical sign: largest-|entry| coordinate positive.
        int arg = 0;
        for (int i = 1; i < f; ++i) {
            if (std::fabs(row[i]) > std::fabs(row[arg])) arg = i;
        }
        if (row[arg] < 0.0) {
            for (int i = 0; i < f; ++i) row[i] = -row[i];
        }
    }
    return t;
}

std::vector<double> pca_apply(const PcaTransform& t, const std::vector<double>& f) {
    if (static_cast<int>(f.size()) != t.f_count) {
        throw ValidationError("pca_apply: feature dimension mismatch");
    }
    std::vector<double> out(static_cast<std::size_t>(t.s_count), 0.0);
    for (int r = 0; r < t.s_count; ++r) {
        const double* row = t.basis.data() + static_cast<std::ptrdiff_t>(r) * t.f_count;
        double acc = 0.0;
        for (int i = 0; i < t.f_count; ++i) {
            acc += row[i] * (f[static_cast<std::size_t>(i)] - t.mean[static_cast<std::size_t>(i)]);
        }
        out[static_cast<std::size_t>(r)] = acc;
    }
    return out;
}

} // namespace gaitkit
