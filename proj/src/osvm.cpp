#include "gaitkit/osvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gaitkit/errors.hpp"

namespace gaitkit {

namespace {

constexpr double kEta_floor = 1e-12;
constexpr double kAlphaKeep = 1e-12;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

PcaTransform identity_pca(int dim) {
    PcaTransform t;
    t.s_count = dim;
    t.f_count = dim;
    t.mode = PcaMode::lowest;
    t.mean.assign(static_cast<std::size_t>(dim), 0.0);
    t.basis.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) t.basis[static_cast<std::size_t>(i) * dim + i] = 1.0;
    t.component_variances.assign(static_cast<std::size_t>(dim), 0.0);
    return t;
}

// b such that h vanishes on the margin support vectors; falls back to the
// KKT interval midpoint when every alpha sits at a bound.
double recover_offset(const std::vector<double>& alpha, const std::vector<double>& grad, double c) {
    const double tau = 1e-8 * c;
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        if (alpha[j] > tau && alpha[j] < c - tau) {
            free_sum += grad[j];
            ++free_count;
        } else if (alpha[j] >= c - tau) {
            lower = std::max(lower, grad[j]);
        } else {
            upper = std::min(upper, grad[j]);
        }
    }
    if (free_count > 0) return free_sum / static_cast<double>(free_count);
    if (std::isinf(lower)) return upper;
    if (std::isinf(upper)) return lower;
    return 0.5 * (lower + upper);
}

} // namespace

void OsvmModel::validate() const {
    if (!(nu > 0.0 && nu < 1.0)) throw ValidationError("osvm: nu must lie in (0,1)");
    if (gamma_rbf < 0.0) throw ValidationError("osvm: gamma must be non-negative");
    if (support_vectors.size() != alphas.size()) throw ValidationError("osvm: SV/alpha mismatch");
    double sum = 0.0;
    for (double a : alphas) {
        if (!(a > 0.0)) throw ValidationError("osvm: non-positive alpha");
        sum += a;
    }
    if (std::fabs(sum - 1.0) > 1e-6) throw ValidationError("osvm: alphas do not sum to 1");
    pca.validate();
}

double rbf_kernel(const std::vector<double>& s, const std::vector<double>& s_prime,
                  double gamma_rbf) {
    if (s.size() != s_prime.size()) throw ValidationError("rbf_kernel: dimension mismatch");
    if (gamma_rbf < 0.0) throw ParameterError("rbf_kernel: gamma must be non-negative");
    return std::exp(-gamma_rbf * sq_dist(s, s_prime));
}

OsvmModel train_osvm(const std::vector<std::vector<double>>& train, double nu, double gamma_rbf,
                     double kkt_tol, std::size_t max_pair_updates, OsvmTrainInfo* info) {
    const std::size_t l = train.size();
    if (l < 2) throw InsufficientDataError("train_osvm: need at least 2 training vectors");
    if (!(nu > 0.0 && nu < 1.0)) throw ParameterError("train_osvm: nu must lie in (0,1)");
    if (gamma_rbf < 0.0) throw ParameterError("train_osvm: gamma must be non-negative");
    const std::size_t dim = train.front().size();
    for (const auto& v : train) {
        if (v.size() != dim) throw ValidationError("train_osvm: ragged training set");
    }

    const double c = 1.0 / (nu * static_cast<double>(l));

    std::vector<double> q(l * l);
    for (std::size_t i = 0; i < l; ++i) {
        q[i * l + i] = 1.0;
        for (std::size_t j = i + 1; j < l; ++j) {
            const double k = std::exp(-gamma_rbf * sq_dist(train[i], train[j]));
            q[i * l + j] = k;
            q[j * l + i] = k;
        }
    }

    // Uniform start is feasible (1/l <= C) and independent of data order.
    std::vector<double> alpha(l, 1.0 / static_cast<double>(l));
    std::vector<double> grad(l, 0.0);
    for (std::size_t i = 0; i < l; ++i) {
        double acc = 0.0;
        const double* qi = q.data() + i * l;
        for (std::size_t j = 0; j < l; ++j) acc += qi[j] * alpha[j];
        grad[i] = acc;
    }

    std::size_t updates = 0;
    double gap = 0.0;
    for (;; ++updates) {
        // Maximal-violating pair: steepest feasible descent direction.
        std::size_t up = l, down = l;
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < l; ++i) {
            if (alpha[i] < c && grad[i] < g_min) {
                g_min = grad[i];
                up = i;
            }
            if (alpha[i] > 0.0 && grad[i] > g_max) {
                g_max = grad[i];
                down = i;
            }
        }
        gap = g_max - g_min;
        if (up == l || down == l || gap <= kkt_tol) break;
        if (updates >= max_pair_updates) {
            throw ConvergenceError("train_osvm: SMO hit the pair-update cap, KKT violation " +
                                   std::to_string(gap));
        }

        const double eta =
            std::max(q[up * l + up] + q[down * l + down] - 2.0 * q[up * l + down], kEta_floor);
        const double lim_up = c - alpha[up];
        const double lim_down = alpha[down];
        const double step = std::min({(grad[down] - grad[up]) / eta, lim_up, lim_down});
        if (step <= 0.0) break;

        // Land exactly on a bound when the clip is active.
        alpha[up] = (step == lim_up) ? c : alpha[up] + step;
        alpha[down] = (step == lim_down) ? 0.0 : alpha[down] - step;
        const double* q_up = q.data() + up * l;
        const double* q_down = q.data() + down * l;
        for (std::size_t k = 0; k < l; ++k) grad[k] += step * (q_up[k] - q_down[k]);
    }

    const double b = recover_offset(alpha, grad, c);

    OsvmModel model;
    model.nu = nu;
    model.gamma_rbf = gamma_rbf;
    model.b = b;
    model.pca = identity_pca(static_cast<int>(dim));
    std::size_t margin = 0;
    const double tau = 1e-8 * c;
    for (std::size_t j = 0; j < l; ++j) {
        if (alpha[j] > kAlphaKeep) {
            model.support_vectors.push_back(train[j]);
            model.alphas.push_back(alpha[j]);
            if (alpha[j] < c - tau) ++margin;
        }
    }
    if (info) {
        info->pair_updates = updates;
        info->kkt_gap = gap;
        info->support_count = model.alphas.size();
        info->margin_sv_count = margin;
    }
    return model;
}

double osvm_score(const OsvmModel& model, const std::vector<double>& s) {
    double acc = 0.0;
    for (std::size_t j = 0; j < model.alphas.size(); ++j) {
        acc += model.alphas[j] * std::exp(-model.gamma_rbf * sq_dist(model.support_vectors[j], s));
    }
    return acc - model.b;
}

int osvm_decide(const OsvmModel& model, const std::vector<double>& s) {
    return osvm_score(model, s) >= 0.0 ? 1 : -1;
}

} // namespace gaitkit
