#include "gaitkit/normalize.hpp"

#include <cmath>

#include "gaitkit/errors.hpp"
#include "gaitkit/spline.hpp"

namespace gaitkit {

std::pair<std::vector<double>, std::vector<double>> magnitudes(const OrientedCycle& oc) {
    const std::size_t n = oc.length();
    std::vector<double> a_mag(n), g_mag(n);
    for (std::size_t i = 0; i < n; ++i) {
        a_mag[i] = std::sqrt(oc.a_xi[i] * oc.a_xi[i] + oc.a_psi[i] * oc.a_psi[i] +
                             oc.a_zeta[i] * oc.a_zeta[i]);
        g_mag[i] = std::sqrt(oc.g_xi[i] * oc.g_xi[i] + oc.g_psi[i] * oc.g_psi[i] +
                             oc.g_zeta[i] * oc.g_zeta[i]);
    }
    return {std::move(a_mag), std::move(g_mag)};
}

std::vector<double> resample_cycle(const std::vector<double>& v, int n) {
    if (v.size() < 4) throw InsufficientDataError("resample_cycle: need at least 4 samples");
    if (n < 2) throw ParameterError("resample_cycle: target length must be >= 2");
    if (v.size() == static_cast<std::size_t>(n)) return v;

    std::vector<double> x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = static_cast<double>(i);
    const double span = static_cast<double>(v.size() - 1);
    std::vector<double> queries(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        queries[static_cast<std::size_t>(j)] = span * static_cast<double>(j) / (n - 1);
    }
    return spline_resample(x, v, queries);
}

std::vector<double> zscore(const std::vector<double>& v) {
    if (v.empty()) throw ValidationError("zscore: empty input");
    const double m = mean_of(v);
    const double var = variance_pop(v);
    if (var <= 1e-12) throw DegenerateError("zscore: near-constant sequence");
    const double inv = 1.0 / std::sqrt(var);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) * inv;
    return out;
}

CycleMatrix assemble_input(const OrientedCycle& oc, bool use_gyro, int n) {
    auto [a_mag, g_mag] = magnitudes(oc);

    CycleMatrix x;
    x.n_cols = n;
    auto add_row = [&](const std::vector<double>& v) { x.rows.push_back(zscore(resample_cycle(v, n))); };
    add_row(oc.a_xi);
    add_row(oc.a_psi);
    add_row(oc.a_zeta);
    add_row(a_mag);
    if (use_gyro) {
        add_row(oc.g_xi);
        add_row(oc.g_psi);
        add_row(oc.g_zeta);
        add_row(g_mag);
    }
    return x;
}

} // namespace gaitkit
