#include "cirdiff/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "cirdiff/csv.hpp"
#include "cirdiff/error.hpp"
#include "cirdiff/json_io.hpp"
#include "cirdiff/rng.hpp"
#include "euler_kernel.hpp"

namespace cirdiff {

namespace {

constexpr double kGridTol = 1e-12;
constexpr double kRecordTol = 1e-9;

std::vector<std::size_t> recorded_steps(const SimConfig& cfg, std::size_t n_steps) {
    std::vector<std::size_t> steps;
    for (std::size_t i = 0; i <= n_steps; i += cfg.record_stride) steps.push_back(i);
    steps.push_back(n_steps);
    for (double t : cfg.record_times) {
        steps.push_back(static_cast<std::size_t>(std::llround(t / cfg.delta)));
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    return steps;
}

// Column of each step in the recorded layout, or -1.
std::vector<std::ptrdiff_t> column_map(std::span<const std::size_t> steps, std::size_t n_steps) {
    std::vector<std::ptrdiff_t> col(n_steps + 1, -1);
    for (std::size_t j = 0; j < steps.size(); ++j) col[steps[j]] = static_cast<std::ptrdiff_t>(j);
    return col;
}

}  // namespace

std::size_t grid_steps(const SimConfig& cfg) {
    if (!(cfg.delta > 0.0) || !std::isfinite(cfg.delta)) fail(ErrorCode::grid, "time step must be positive");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) fail(ErrorCode::grid, "horizon must be positive");
    const double n = std::round(cfg.horizon / cfg.delta);
    if (std::abs(n * cfg.delta - cfg.horizon) > kGridTol || n < 1.0) {
        std::ostringstream os;
        os << "horizon " << cfg.horizon << " is not a multiple of the time step " << cfg.delta;
        fail(ErrorCode::grid, os.str());
    }
    return static_cast<std::size_t>(n);
}

void validate(const SimConfig& cfg) {
    const std::size_t n = grid_steps(cfg);
    if (cfg.paths < 1) fail(ErrorCode::domain, "need at least one path");
    if (cfg.record_stride < 1) fail(ErrorCode::domain, "record stride must be >= 1");
    for (double t : cfg.record_times) {
        const double snapped = nearest_grid_time(t, cfg.delta);
        if (!(t >= 0.0) || std::abs(snapped - t) > kRecordTol ||
            std::llround(t / cfg.delta) > static_cast<long long>(n)) {
            std::ostringstream os;
            os << "record time " << t << " is not on the simulation grid [0, " << cfg.horizon
               << "] with step " << cfg.delta;
            fail(ErrorCode::grid, os.str());
        }
    }
}

double nearest_grid_time(double t, double delta) {
    return static_cast<double>(std::llround(t / delta)) * delta;
}

double gaussian_increment(std::uint64_t seed, std::size_t path, std::uint64_t leg, std::size_t step) {
    return rng::normal(rng::substream_key(seed, path, leg), step);
}

PathSet::PathSet(const DiffModel& model, const SimConfig& cfg, std::vector<std::size_t> recorded)
    : model_(model), config_(cfg), paths_(cfg.paths), steps_(std::move(recorded)) {
    times_.reserve(steps_.size());
    for (std::size_t s : steps_) times_.push_back(static_cast<double>(s) * cfg.delta);
    const std::size_t n = paths_ * steps_.size();
    x_.assign(n, 0.0);
    y_.assign(n, 0.0);
    r_.assign(n, 0.0);
    integral_.assign(n, 0.0);
}

std::size_t PathSet::index_of(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t - kRecordTol);
    if (it == times_.end() || std::abs(*it - t) > kRecordTol) {
        std::ostringstream os;
        os << "time " << t << " is not a recorded point of the path set";
        if (!times_.empty() && t > times_.back()) os << " (beyond the horizon " << times_.back() << ")";
        fail(ErrorCode::grid, os.str());
    }
    return static_cast<std::size_t>(it - times_.begin());
}

double PathSet::discount(std::size_t path, std::size_t j) const { return std::exp(-integral(path, j)); }

PathSet simulate(const DiffModel& m, const SimConfig& cfg) {
    validate(cfg);
    const std::size_t n_steps = grid_steps(cfg);
    PathSet out(m, cfg, recorded_steps(cfg, n_steps));
    const auto col = column_map(out.steps(), n_steps);
    const std::size_t width = out.points();
    const double dt = cfg.delta;
    const double sqrt_dt = std::sqrt(dt);
    auto xs = out.x_data();
    auto ys = out.y_data();
    auto rs = out.r_data();
    auto is = out.integral_data();
    const auto n_paths = static_cast<std::ptrdiff_t>(cfg.paths);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t pi = 0; pi < n_paths; ++pi) {
        const auto path = static_cast<std::size_t>(pi);
        const std::uint64_t key_x = rng::substream_key(cfg.seed, path, kStreamX);
        const std::uint64_t key_y = rng::substream_key(cfg.seed, path, kStreamY);
        const std::size_t row = path * width;
        double x = m.x.z0;
        double y = m.y.z0;
        double integral = 0.0;
        for (std::size_t i = 0;; ++i) {
            const double r = x - y;
            if (col[i] >= 0) {
                const std::size_t at = row + static_cast<std::size_t>(col[i]);
                xs[at] = x;
                ys[at] = y;
                rs[at] = r;
                is[at] = integral;
            }
            if (i == n_steps) break;
            integral += r * dt;
            const double dwx = sqrt_dt * rng::normal(key_x, i);
            const double dwy = sqrt_dt * rng::normal(key_y, i);
            x = detail::euler_step(x, m.x, dt, dwx);
            y = detail::euler_step(y, m.y, dt, dwy);
        }
    }
    return out;
}

// -- summaries --------------------------------------------------------------

std::vector<DiscountEstimate> discount_factors(const PathSet& p, std::span<const double> maturities,
                                               double level) {
    if (p.paths() == 0) fail(ErrorCode::domain, "path set is empty");
    std::vector<DiscountEstimate> out;
    std::vector<double> d(p.paths());
    for (double T : maturities) {
        const std::size_t j = p.index_of(T);
        for (std::size_t k = 0; k < p.paths(); ++k) d[k] = p.discount(k, j);
        out.push_back({p.times()[j], mc_estimate(d, level)});
    }
    return out;
}

namespace {

struct CentralMoments {
    double mean = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
};

CentralMoments central_moments(std::span<const double> v) {
    CentralMoments c;
    const double n = static_cast<double>(v.size());
    c.mean = neumaier_sum(v) / n;
    std::vector<double> p2(v.size()), p3(v.size()), p4(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - c.mean;
        p2[i] = d * d;
        p3[i] = p2[i] * d;
        p4[i] = p2[i] * p2[i];
    }
    c.m2 = neumaier_sum(p2) / n;
    c.m3 = neumaier_sum(p3) / n;
    c.m4 = neumaier_sum(p4) / n;
    return c;
}

double skew_of(const CentralMoments& c) { return c.m2 > 0.0 ? c.m3 / std::pow(c.m2, 1.5) : 0.0; }
double kurt_of(const CentralMoments& c) { return c.m2 > 0.0 ? c.m4 / (c.m2 * c.m2) - 3.0 : 0.0; }

}  // namespace

DistributionSummary sample_summary(std::span<const double> v, std::size_t bins) {
    if (v.empty()) fail(ErrorCode::domain, "distribution summary needs samples");
    DistributionSummary s;
    const std::size_t n = v.size();
    const double nd = static_cast<double>(n);
    const CentralMoments c = central_moments(v);
    s.samples = n;
    s.mean = c.mean;
    s.variance = n > 1 ? c.m2 * nd / (nd - 1.0) : 0.0;
    s.skewness = skew_of(c);
    s.excess_kurtosis = kurt_of(c);
    s.se_mean = std::sqrt(s.variance / nd);
    s.se_variance = std::sqrt(std::max(c.m4 - c.m2 * c.m2, 0.0) / nd);

    constexpr std::size_t groups = 20;
    if (n >= 2 * groups) {
        std::vector<double> skews, kurts, rest;
        rest.reserve(n);
        for (std::size_t g = 0; g < groups; ++g) {
            const std::size_t lo = g * n / groups;
            const std::size_t hi = (g + 1) * n / groups;
            rest.clear();
            rest.insert(rest.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo));
            rest.insert(rest.end(), v.begin() + static_cast<std::ptrdiff_t>(hi), v.end());
            const CentralMoments cg = central_moments(rest);
            skews.push_back(skew_of(cg));
            kurts.push_back(kurt_of(cg));
        }
        auto jackknife_se = [&](const std::vector<double>& est) {
            const double mean = neumaier_sum(est) / groups;
            double ss = 0.0;
            for (double e : est) ss += (e - mean) * (e - mean);
            return std::sqrt((groups - 1.0) / groups * ss);
        };
        s.se_skewness = jackknife_se(skews);
        s.se_kurtosis = jackknife_se(kurts);
    } else {
        s.se_skewness = std::nan("");
        s.se_kurtosis = std::nan("");
    }

    bins = std::max<std::size_t>(bins, 1);
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    double lo = *mn;
    double hi = *mx;
    if (!(hi > lo)) {
        const double pad = 0.5 * std::max(std::abs(lo), 1e-12);
        lo -= pad;
        hi += pad;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    s.histogram.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        s.histogram[b].lo = lo + static_cast<double>(b) * width;
        s.histogram[b].hi = b + 1 == bins ? hi : lo + static_cast<double>(b + 1) * width;
    }
    for (double x : v) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        s.histogram[std::min(b, bins - 1)].count++;
    }
    const double sd = std::sqrt(s.variance);
    for (HistogramBin& bin : s.histogram) {
        bin.density = static_cast<double>(bin.count) / (nd * width);
        const double mid = 0.5 * (bin.lo + bin.hi);
        bin.normal_density = sd > 0.0 ? normal_pdf((mid - s.mean) / sd) / sd : 0.0;
    }
    return s;
}

DistributionSummary distribution_summary(const PathSet& p, double t, std::size_t bins) {
    if (p.paths() == 0) fail(ErrorCode::domain, "path set is empty");
    const std::size_t j = p.index_of(t);
    std::vector<double> r(p.paths());
    for (std::size_t k = 0; k < p.paths(); ++k) r[k] = p.r(k, j);
    DistributionSummary s = sample_summary(r, bins);
    s.t = p.times()[j];
    return s;
}

// -- exports ----------------------------------------------------------------

void write_discount_csv(const std::filesystem::path& path, const PathSet& p,
                        std::span<const DiscountEstimate> estimates) {
    auto out = csv::open_output(path);
    out << "maturity,mc_mean,std_err,ci_low,ci_high,analytic\n";
    for (const DiscountEstimate& e : estimates) {
        out << csv::format(e.maturity) << ',' << csv::format(e.estimate.mean) << ','
            << csv::format(e.estimate.std_err) << ',' << csv::format(e.estimate.ci_low) << ','
            << csv::format(e.estimate.ci_high) << ',' << csv::format(zcb_price(p.model(), e.maturity))
            << '\n';
    }
}

void export_paths(const std::filesystem::path& csv_path, const PathSet& p, std::size_t max_paths) {
    const std::size_t n = std::min(max_paths, p.paths());
    {
        auto out = csv::open_output(csv_path);
        out << "time";
        for (std::size_t k = 0; k < n; ++k) out << ",path_" << k;
        out << '\n';
        for (std::size_t j = 0; j < p.points(); ++j) {
            out << csv::format(p.times()[j]);
            for (std::size_t k = 0; k < n; ++k) out << ',' << csv::format(p.r(k, j));
            out << '\n';
        }
    }
    nlohmann::ordered_json side;
    side["seed"] = p.config().seed;
    side["delta"] = p.config().delta;
    side["M"] = p.paths();
    side["exported_paths"] = n;
    side["horizon"] = p.config().horizon;
    side["model"] = model_to_json(p.model());
    auto sidecar = csv_path;
    sidecar.replace_extension(".json");
    auto out = csv::open_output(sidecar);
    out << side.dump(2) << '\n';
}

}  // namespace cirdiff
