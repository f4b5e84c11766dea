#pragma once

#include <cstddef>
#include <span>

namespace cirdiff {

/// Compensated (Neumaier) sum in index order; deterministic.
double neumaier_sum(std::span<const double> v);

double normal_pdf(double x);
double normal_cdf(double x);

/// z such that P(|N(0,1)| <= z) = level.
double two_sided_z(double level);

/// Monte Carlo estimate with a CLT confidence interval.
struct McEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.0;
    std::size_t samples = 0;

    bool contains(double v) const { return ci_low <= v && v <= ci_high; }
};

McEstimate mc_estimate(std::span<const double> samples, double level);

}  // namespace cirdiff
