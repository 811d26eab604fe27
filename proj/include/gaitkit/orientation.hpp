#pragma once

#include <vector>

#include "gaitkit/cycles.hpp"
#include "gaitkit/mathutil.hpp"

namespace gaitkit {

// Right-handed orthonormal basis: zeta up (along mean gravity), xi forward
// (PCA heading of the gravity-flattened acceleration), psi = zeta x xi.
struct Frame {
    Vec3 zeta, xi, psi;
};

// One cycle expressed in the orientation-invariant system.
struct OrientedCycle {
    std::vector<double> a_xi, a_psi, a_zeta;
    std::vector<double> g_xi, g_psi, g_zeta;
    Frame frame;
    Vec3 gravity;

    std::size_t length() const { return a_xi.size(); }
};

// Per-axis mean of the cycle's acceleration samples.
Vec3 estimate_gravity(const GaitCycle& cycle);

// rho / ||rho||; near-zero estimates are degenerate.
Vec3 vertical_versor(const Vec3& rho);

// out = M^T v: per-sample projection of a 3 x n signal onto a unit vector.
std::vector<double> project(const TriSignal& m, const Vec3& v);

// A_f = A - zeta a_zeta^T; every column ends up orthogonal to zeta.
TriSignal flatten(const TriSignal& a, const Vec3& zeta, const std::vector<double>& a_zeta);

// Unit eigenvector of the sample autocovariance of the row-mean-centered
// flattened acceleration, for the largest eigenvalue. The sign is chosen so
// the skewness of the projected sequence is non-negative (ties: first
// non-zero component positive). Near-isotropic data is degenerate.
Vec3 pca_heading(const TriSignal& a_flat);

OrientedCycle transform_cycle(const GaitCycle& cycle);

} // namespace gaitkit
