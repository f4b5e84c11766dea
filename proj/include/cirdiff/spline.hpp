#pragma once

#include <span>
#include <vector>

namespace cirdiff {

/// Natural cubic spline (zero second derivative at both ends) through
/// strictly increasing knots. One knot gives a constant, two a straight line.
/// Outside [front, back] the end values are held flat.
class NaturalCubicSpline {
public:
    NaturalCubicSpline() = default;
    NaturalCubicSpline(std::span<const double> x, std::span<const double> y);

    double operator()(double x) const;

    std::span<const double> knots() const { return x_; }
    std::span<const double> values() const { return y_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;  // second derivatives at the knots
};

}  // namespace cirdiff
