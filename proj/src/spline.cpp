#include "gaitkit/spline.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "gaitkit/errors.hpp"

namespace gaitkit {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size()) throw ValidationError("spline: x/y length mismatch");
    if (n < 4) throw InsufficientDataError("spline: need at least 4 samples");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) throw ValidationError("spline: knots must be strictly increasing");
    }

    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

    // Tridiagonal system in the interior second derivatives M_1..M_{n-2};
    // the not-a-knot conditions are folded into the first and last rows.
    const std::size_t m = n - 2;
    std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);

    auto divdiff = [&](std::size_t i) {
        return 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    };

    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = k + 1; // knot index
        lower[k] = h[i - 1];
        diag[k] = 2.0 * (h[i - 1] + h[i]);
        upper[k] = h[i];
        rhs[k] = divdiff(i);
    }

    // Left boundary: M_0 = ((h0+h1) M_1 - h0 M_2) / h1.
    diag[0] = (h[0] + h[1]) * (h[0] + 2.0 * h[1]);
    upper[0] = h[1] * h[1] - h[0] * h[0];
    rhs[0] = divdiff(1) * h[1];
    // Right boundary: M_{n-1} = ((h_{n-2}+h_{n-3}) M_{n-2} - h_{n-2} M_{n-3}) / h_{n-3}.
    const double hl = h[n - 3], hr = h[n - 2];
    lower[m - 1] = hl * hl - hr * hr;
    diag[m - 1] = (hl + hr) * (hr + 2.0 * hl);
    rhs[m - 1] = divdiff(n - 2) * hl;

    // Thomas algorithm.
    for (std::size_t k = 1; k < m; ++k) {
        const double w = lower[k] / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    std::vector<double> sol(m);
    sol[m - 1] = rhs[m - 1] / diag[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) {
        sol[k] = (rhs[k] - upper[k] * sol[k + 1]) / diag[k];
    }

    m_.assign(n, 0.0);
    for (std::size_t k = 0; k < m; ++k) m_[k + 1] = sol[k];
    m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
    m_[n - 1] = ((hr + hl) * m_[n - 2] - hr * m_[n - 3]) / hl;
}

double CubicSpline::operator()(double t) const {
    t = std::clamp(t, x_.front(), x_.back());
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);

    const double h = x_[i + 1] - x_[i];
    const double a = x_[i + 1] - t;
    const double b = t - x_[i];
    return m_[i] * a * a * a / (6.0 * h) + m_[i + 1] * b * b * b / (6.0 * h) +
           (y_[i] / h - m_[i] * h / 6.0) * a + (y_[i + 1] / h - m_[i + 1] * h / 6.0) * b;
}

std::vector<double> spline_resample(const std::vector<double>& x,
                                    const std::vector<double>& y,
                                    const std::vector<double>& queries) {
    const CubicSpline s(x, y);
    std::vector<double> out;
    out.reserve(queries.size());
    for (double q : queries) out.push_back(s(q));
    return out;
}

} // namespace gaitkit
