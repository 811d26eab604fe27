#pragma once

#include <vector>

namespace gaitkit {

// Interpolating cubic spline with not-a-knot end conditions. Reproduces
// polynomials up to degree 3 exactly and passes through every knot.
// Requires at least 4 strictly increasing knots.
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y);

    // Evaluate at t; queries outside [x_front, x_back] are clamped.
    double operator()(double t) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_; // second derivatives at the knots
};

// Convenience: fit on (x, y), evaluate at each query point.
std::vector<double> spline_resample(const std::vector<double>& x,
                                    const std::vector<double>& y,
                                    const std::vector<double>& queries);

} // namespace gaitkit
