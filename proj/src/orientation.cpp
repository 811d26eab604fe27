#include "gaitkit/orientation.hpp"

#include <cmath>

#include "gaitkit/errors.hpp"

namespace gaitkit {

Vec3 estimate_gravity(const GaitCycle& cycle) {
    const std::size_t n = cycle.length();
    if (n == 0) throw ValidationError("estimate_gravity: empty cycle");
    Vec3 rho;
    for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (double v : cycle.accel[c]) acc += v;
        rho[c] = acc / static_cast<double>(n);
    }
    return rho;
}

Vec3 vertical_versor(const Vec3& rho) {
    const double n = rho.norm();
    if (n <= 1e-6) throw DegenerateError("vertical_versor: gravity estimate near zero");
    return {rho.x / n, rho.y / n, rho.z / n};
}

std::vector<double> project(const TriSignal& m, const Vec3& v) {
    const std::size_t n = m[0].size();
    if (m[1].size() != n || m[2].size() != n) throw ValidationError("project: ragged signal");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = m[0][i] * v.x + m[1][i] * v.y + m[2][i] * v.z;
    }
    return out;
}

TriSignal flatten(const TriSignal& a, const Vec3& zeta, const std::vector<double>& a_zeta) {
    const std::size_t n = a[0].size();
    if (a_zeta.size() != n) throw ValidationError("flatten: projection length mismatch");
    TriSignal out;
    for (int c = 0; c < 3; ++c) {
        out[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) out[c][i] = a[c][i] - zeta[c] * a_zeta[i];
    }
    return out;
}

Vec3 pca_heading(const TriSignal& a_flat) {
    const std::size_t n = a_flat[0].size();
    if (n < 3) throw ValidationError("pca_heading: need at least 3 samples");

    double mean[3];
    for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (double v : a_flat[c]) acc += v;
        mean[c] = acc / static_cast<double>(n);
    }

    std::vector<double> sigma(9, 0.0);
    for (int r = 0; r < 3; ++r) {
        for (int c = r; c < 3; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += (a_flat[r][i] - mean[r]) * (a_flat[c][i] - mean[c]);
            }
            acc /= static_cast<double>(n - 1);
            sigma[static_cast<std::size_t>(r) * 3 + c] = acc;
            sigma[static_cast<std::size_t>(c) * 3 + r] = acc;
        }
    }

    std::vector<double> evals, evecs;
    jacobi_eigen_sym(3, sigma, evals, evecs);

    if (!(evals[0] > 0.0) || evals[0] < (1.0 + 1e-6) * std::max(evals[1], 0.0)) {
        throw DegenerateError("pca_heading: isotropic flattened data, heading undefined");
    }

    Vec3 v{evecs[0], evecs[3], evecs[6]}; // first column = dominant eigenvector
    v = v.normalized();

    std::vector<double> proj(n);
    for (std::size_t i = 0; i < n; ++i) {
        proj[i] = a_flat[0][i] * v.x + a_flat[1][i] * v.y + a_flat[2][i] * v.z;
    }
    const double skew = skewness_of(proj);
    if (skew < -1e-12) {
        v = -v;
    } else if (skew <= 1e-12) {
        // Tie: make the first non-zero component positive.
        for (int c = 0; c < 3; ++c) {
            if (std::fabs(v[c]) > 1e-12) {
                if (v[c] < 0.0) v = -v;
                break;
            }
        }
    }
    return v;
}

OrientedCycle transform_cycle(const GaitCycle& cycle) {
    OrientedCycle out;
    out.gravity = estimate_gravity(cycle);
    Vec3 zeta = vertical_versor(out.gravity);

    out.a_zeta = project(cycle.accel, zeta);
    out.g_zeta = project(cycle.gyro, zeta);

    const TriSignal a_flat = flatten(cycle.accel, zeta, out.a_zeta);
    Vec3 xi = pca_heading(a_flat);
    // The heading is orthogonal to zeta by construction; scrub the residual
    // rounding so the frame invariants hold to 1e-9.
    xi = (xi - zeta * xi.dot(zeta)).normalized();
    const Vec3 psi = zeta.cross(xi);

    out.frame = Frame{zeta, xi, psi};
    out.a_xi = project(cycle.accel, xi);
    out.a_psi = project(cycle.accel, psi);
    out.g_xi = project(cycle.gyro, xi);
    out.g_psi = project(cycle.gyro, psi);
    return out;
}

} // namespace gaitkit
