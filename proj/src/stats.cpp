#include "cirdiff/stats.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "cirdiff/error.hpp"
#include "cirdiff/rng.hpp"

namespace cirdiff {

double neumaier_sum(std::span<const double> v) {
    double sum = 0.0;
    double comp = 0.0;
    for (double x : v) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double two_sided_z(double level) {
    if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::domain, "confidence level must lie in (0, 1)");
    return rng::normal_quantile(0.5 + 0.5 * level);
}

McEstimate mc_estimate(std::span<const double> samples, double level) {
    if (samples.empty()) fail(ErrorCode::domain, "Monte Carlo estimate needs at least one sample");
    const double n = static_cast<double>(samples.size());
    McEstimate e;
    e.level = level;
    e.samples = samples.size();
    e.mean = neumaier_sum(samples) / n;
    if (samples.size() > 1) {
        std::vector<double> sq(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double d = samples[i] - e.mean;
            sq[i] = d * d;
        }
        e.std_err = std::sqrt(neumaier_sum(sq) / (n - 1.0) / n);
    }
    const double z = two_sided_z(level);
    e.ci_low = e.mean - z * e.std_err;
    e.ci_high = e.mean + z * e.std_err;
    return e;
}

}  // namespace cirdiff
