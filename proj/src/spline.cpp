#include "cirdiff/spline.hpp"

#include <algorithm>
#include <cmath>

#include "cirdiff/error.hpp"

namespace cirdiff {

NaturalCubicSpline::NaturalCubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(x.size(), 0.0) {
    if (x_.empty() || x_.size() != y_.size()) {
        fail(ErrorCode::validation, "spline needs matching, non-empty knot and value arrays");
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
            fail(ErrorCode::validation, "spline knots and values must be finite");
        }
        if (i > 0 && !(x_[i] > x_[i - 1])) {
            fail(ErrorCode::validation, "spline knots must be strictly increasing");
        }
    }
    const std::size_t n = x_.size();
    if (n < 3) return;

    // Tridiagonal system for the interior second derivatives (Thomas algorithm).
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < k; ++i) {
        const double lower = x_[i + 1] - x_[i];  // h_{i}, symmetric with upper[i-1]
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m_[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i >= 1; --i) {
        m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
    }
}

double NaturalCubicSpline::operator()(double x) const {
    if (x_.empty()) fail(ErrorCode::validation, "spline is empty");
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

}  // namespace cirdiff
