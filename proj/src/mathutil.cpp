#include "gaitkit/mathutil.hpp"

#include <algorithm>
#include <numeric>

#include "gaitkit/errors.hpp"

namespace gaitkit {

bool Mat3::is_rotation(double tol) const {
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += (*this)(r, k) * (*this)(c, k);
            const double want = (r == c) ? 1.0 : 0.0;
            if (std::fabs(dot - want) > tol) return false;
        }
    }
    return std::fabs(det() - 1.0) <= tol;
}

Mat3 random_rotation(Rng& rng) {
    // Shoemake's method: uniform quaternion from three uniforms.
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double qx = a * std::sin(2.0 * M_PI * u2);
    const double qy = a * std::cos(2.0 * M_PI * u2);
    const double qz = b * std::sin(2.0 * M_PI * u3);
    const double qw = b * std::cos(2.0 * M_PI * u3);

    Mat3 r;
    r(0, 0) = 1 - 2 * (qy * qy + qz * qz);
    r(0, 1) = 2 * (qx * qy - qz * qw);
    r(0, 2) = 2 * (qx * qz + qy * qw);
    r(1, 0) = 2 * (qx * qy + qz * qw);
    r(1, 1) = 1 - 2 * (qx * qx + qz * qz);
    r(1, 2) = 2 * (qy * qz - qx * qw);
    r(2, 0) = 2 * (qx * qz - qy * qw);
    r(2, 1) = 2 * (qy * qz + qx * qw);
    r(2, 2) = 1 - 2 * (qx * qx + qy * qy);
    return r;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_pop(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size());
}

double variance_sample(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

double skewness_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double m2 = 0.0, m3 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(v.size());
    m3 /= static_cast<double>(v.size());
    if (m2 <= 0.0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

void jacobi_eigen_sym(std::size_t n, const std::vector<double>& a_in,
                      std::vector<double>& values, std::vector<double>& vecs) {
    if (a_in.size() != n * n) throw ValidationError("jacobi_eigen_sym: matrix size mismatch");

    std::vector<double> a(n * n);
    // Symmetrize up front; callers may carry tiny asymmetries.
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) a[r * n + c] = 0.5 * (a_in[r * n + c] + a_in[c * n + r]);

    vecs.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;

    auto off_diag_norm = [&]() {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = r + 1; c < n; ++c) s += a[r * n + c] * a[r * n + c];
        return std::sqrt(s);
    };

    double scale = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::fabs(a[i]));
    const double tol = (scale > 0.0 ? scale : 1.0) * 1e-15 * static_cast<double>(n);

    for (int sweep = 0; sweep < 100 && off_diag_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::fabs(apq) <= tol * 1e-2) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vecs[k * n + p];
                    const double vkq = vecs[k * n + q];
                    vecs[k * n + p] = c * vkp - s * vkq;
                    vecs[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    values.resize(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = a[i * n + i];

    // Sort descending by eigenvalue, permuting eigenvector columns alongside.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] > values[j]; });

    std::vector<double> sorted_vals(n);
    std::vector<double> sorted_vecs(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted_vals[j] = values[order[j]];
        for (std::size_t r = 0; r < n; ++r) sorted_vecs[r * n + j] = vecs[r * n + order[j]];
    }
    values = std::move(sorted_vals);
    vecs = std::move(sorted_vecs);
}

} // namespace gaitkit
