#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gaitkit/rng.hpp"

namespace gaitkit {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
};

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double& operator()(int r, int c) { return m[static_cast<std::size_t>(r) * 3 + c]; }
    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * 3 + c]; }

    Vec3 apply(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 transposed() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
        return t;
    }
    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
    bool is_rotation(double tol = 1e-9) const;

    static Mat3 identity() { return {}; }
};

// Uniformly distributed rotation (random unit quaternion), det = +1.
Mat3 random_rotation(Rng& rng);

// Three equal-length channels indexed [axis][sample]; the in-memory form of a
// 3 x n signal matrix whose rows are the x/y/z axes.
using TriSignal = std::array<std::vector<double>, 3>;

double mean_of(const std::vector<double>& v);
// Population variance (divide by n).
double variance_pop(const std::vector<double>& v);
// Sample variance (divide by n-1).
double variance_sample(const std::vector<double>& v);
double skewness_of(const std::vector<double>& v);

// Eigen-decomposition of a symmetric n x n matrix (row-major) by cyclic Jacobi
// rotations. Outputs are sorted by descending eigenvalue; eigenvectors are the
// columns of `vecs` (also row-major n x n), orthonormal to machine precision.
void jacobi_eigen_sym(std::size_t n, const std::vector<double>& a,
                      std::vector<double>& values, std::vector<double>& vecs);

} // namespace gaitkit
