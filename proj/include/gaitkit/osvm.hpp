#pragma once

#include <vector>

#include "gaitkit/pca.hpp"

namespace gaitkit {

// nu-one-class SVM with RBF kernel. Dual program:
//   min 1/2 sum_ij alpha_i alpha_j K(s_i, s_j)
//   s.t. 0 <= alpha_j <= 1/(nu*l),  sum_j alpha_j = 1
// b is recovered from the margin support vectors; score and decision follow
// h(s) = sum_j alpha_j K(s_j, s) - b, d(s) = sgn(h(s)) with 0 -> +1.
struct OsvmModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> alphas; // > 0, one per SV; sum = 1
    double b = 0.0;
    double gamma_rbf = 0.3;
    double nu = 0.02;
    PcaTransform pca; // feature selection applied upstream of the kernel

    void validate() const;
};

double rbf_kernel(const std::vector<double>& s, const std::vector<double>& s_prime,
                  double gamma_rbf);

struct OsvmTrainInfo {
    std::size_t pair_updates = 0;
    double kkt_gap = 0.0;
    std::size_t support_count = 0;
    std::size_t margin_sv_count = 0;
};

// SMO solver (maximal-violating-pair selection) to the given KKT tolerance.
// Starts from the uniform feasible point; throws ConvergenceError when the
// pair-update cap is hit first.
OsvmModel train_osvm(const std::vector<std::vector<double>>& train, double nu = 0.02,
                     double gamma_rbf = 0.3, double kkt_tol = 1e-6,
                     std::size_t max_pair_updates = 1000000, OsvmTrainInfo* info = nullptr);

double osvm_score(const OsvmModel& model, const std::vector<double>& s);
int osvm_decide(const OsvmModel& model, const std::vector<double>& s);

} // namespace gaitkit
