#pragma once

#include <string>
#include <vector>

namespace gaitkit {

enum class PcaMode { lowest, highest };

// Affine projection to the S retained principal directions. `basis` rows are
// unit-norm eigenvectors of the sample covariance, sign-canonicalized so the
// largest-magnitude coordinate is positive.
struct PcaTransform {
    std::vector<double> mean;                // F
    std::vector<double> basis;               // S x F, row-major
    std::vector<double> component_variances; // S (eigenvalues)
    int s_count = 0;
    int f_count = 0;
    PcaMode mode = PcaMode::lowest;

    void validate() const;
};

const char* pca_mode_name(PcaMode mode);
PcaMode pca_mode_from_name(const std::string& name);

// Eigen-decomposition of the sample covariance (divisor n-1) keeping the S
// components of smallest (default) or largest variance.
PcaTransform fit_pca(const std::vector<std::vector<double>>& features, int s_count = 20,
                     PcaMode mode = PcaMode::lowest);

// basis * (f - mean)
std::vector<double> pca_apply(const PcaTransform& t, const std::vector<double>& f);

} // namespace gaitkit
