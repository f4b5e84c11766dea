#pragma once
//
// Truncated Euler-Maruyama simulation of the two CIR legs
//
//   z_{i+1} = z_i + k (theta - z_i) dt + sigma sqrt(max(z_i, 0)) dW_i
//
// The state itself is not floored. Alongside x, y and r = x - y each path
// carries the left-point integral sum_{j<i} r_j dt used for path-wise
// discounting. Paths are simulated in parallel (OpenMP); simulate_reference()
// is the plain serial version and must agree with simulate() bit for bit.
//

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cirdiff/core_model.hpp"
#include "cirdiff/stats.hpp"

namespace cirdiff {

struct SimConfig {
    double horizon = 30.0;
    double delta = 1.0 / 256.0;
    std::size_t paths = 10000;
    std::uint64_t seed = 0;
    /// Keep every record_stride-th grid point (the horizon is always kept).
    std::size_t record_stride = 1;
    /// Additional grid times to keep; each must lie on the Euler grid.
    std::vector<double> record_times;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Number of Euler steps; throws grid unless horizon is a multiple of delta
/// to within 1e-12.
std::size_t grid_steps(const SimConfig& cfg);

/// Throws grid/domain on an unusable configuration.
void validate(const SimConfig& cfg);

/// Grid time closest to t, i.e. round(t / delta) * delta.
double nearest_grid_time(double t, double delta);

/// Leg tags of the Gaussian substreams.
inline constexpr std::uint64_t kStreamX = 0;
inline constexpr std::uint64_t kStreamY = 1;

/// i-th standard normal driving `leg` on `path`.
double gaussian_increment(std::uint64_t seed, std::size_t path, std::uint64_t leg, std::size_t step);

class PathSet {
public:
    PathSet() = default;
    PathSet(const DiffModel& model, const SimConfig& cfg, std::vector<std::size_t> recorded_steps);

    std::size_t paths() const { return paths_; }
    std::size_t points() const { return steps_.size(); }
    std::span<const double> times() const { return times_; }
    std::span<const std::size_t> steps() const { return steps_; }
    const DiffModel& model() const { return model_; }
    const SimConfig& config() const { return config_; }

    /// Column of a recorded time; throws grid if t is not recorded.
    std::size_t index_of(double t) const;

    double x(std::size_t path, std::size_t j) const { return x_[path * points() + j]; }
    double y(std::size_t path, std::size_t j) const { return y_[path * points() + j]; }
    double r(std::size_t path, std::size_t j) const { return r_[path * points() + j]; }
    /// Left-point integral of r from 0 to times()[j].
    double integral(std::size_t path, std::size_t j) const { return integral_[path * points() + j]; }

    /// Path-wise discount factor exp(-integral).
    double discount(std::size_t path, std::size_t j) const;

    // Row-major (path, point) storage, for kernels and exports.
    std::span<double> x_data() { return x_; }
    std::span<double> y_data() { return y_; }
    std::span<double> r_data() { return r_; }
    std::span<double> integral_data() { return integral_; }
    std::span<const double> r_data() const { return r_; }

    friend bool operator==(const PathSet&, const PathSet&) = default;

private:
    DiffModel model_;
    SimConfig config_;
    std::size_t paths_ = 0;
    std::vector<std::size_t> steps_;
    std::vector<double> times_;
    std::vector<double> x_, y_, r_, integral_;
};

/// OpenMP-parallel over paths.
PathSet simulate(const DiffModel& m, const SimConfig& cfg);

/// Serial, step-major reference implementation.
PathSet simulate_reference(const DiffModel& m, const SimConfig& cfg);

// -- summaries --------------------------------------------------------------

struct DiscountEstimate {
    double maturity = 0.0;
    McEstimate estimate;
};

/// Mean, standard error and CLT interval of exp(-int_0^T r ds) per maturity.
std::vector<DiscountEstimate> discount_factors(const PathSet& p, std::span<const double> maturities,
                                               double level = 0.999);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double density = 0.0;         // count / (n * width)
    double normal_density = 0.0;  // matched normal at the bin centre
};

struct DistributionSummary {
    double t = 0.0;
    std::size_t samples = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double se_mean = 0.0;
    double se_variance = 0.0;
    double se_skewness = 0.0;  // delete-a-group jackknife, 20 groups
    double se_kurtosis = 0.0;
    std::vector<HistogramBin> histogram;
};

DistributionSummary distribution_summary(const PathSet& p, double t, std::size_t bins = 50);

/// Moments of an arbitrary sample, same conventions as distribution_summary().
DistributionSummary sample_summary(std::span<const double> sample, std::size_t bins = 50);

// -- exports ----------------------------------------------------------------

/// `maturity,mc_mean,std_err,ci_low,ci_high,analytic`, analytic = model P(0,T).
void write_discount_csv(const std::filesystem::path& path, const PathSet& p,
                        std::span<const DiscountEstimate> estimates);

/// r paths as CSV (`time,path_0,...`) for the first max_paths paths, with a
/// JSON sidecar {seed, delta, M, model}.
void export_paths(const std::filesystem::path& csv_path, const PathSet& p, std::size_t max_paths);

}  // namespace cirdiff
