// Serial reference for simulate(). Step-major: all paths advance one step at a
// time, which is the textbook way to write the recursion and shares nothing
// with the parallel kernel except the single-step update.

#include <cmath>

#include "cirdiff/rng.hpp"
#include "cirdiff/simulation.hpp"
#include "euler_kernel.hpp"

namespace cirdiff {

PathSet simulate_reference(const DiffModel& m, const SimConfig& cfg) {
    validate(cfg);
    const std::size_t n_steps = grid_steps(cfg);
    const std::size_t n_paths = cfg.paths;

    std::vector<std::size_t> recorded;
    for (std::size_t i = 0; i <= n_steps; ++i) {
        bool keep = i % cfg.record_stride == 0 || i == n_steps;
        for (double t : cfg.record_times) keep = keep || std::llround(t / cfg.delta) == static_cast<long long>(i);
        if (keep) recorded.push_back(i);
    }
    PathSet out(m, cfg, recorded);
    const std::size_t width = out.points();

    std::vector<double> x(n_paths, m.x.z0), y(n_paths, m.y.z0), integral(n_paths, 0.0);
    std::vector<std::uint64_t> key_x(n_paths), key_y(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        key_x[p] = rng::substream_key(cfg.seed, p, kStreamX);
        key_y[p] = rng::substream_key(cfg.seed, p, kStreamY);
    }

    const double dt = cfg.delta;
    const double sqrt_dt = std::sqrt(dt);
    std::size_t col = 0;
    for (std::size_t i = 0; i <= n_steps; ++i) {
        if (col < width && recorded[col] == i) {
            for (std::size_t p = 0; p < n_paths; ++p) {
                const std::size_t at = p * width + col;
                out.x_data()[at] = x[p];
                out.y_data()[at] = y[p];
                out.r_data()[at] = x[p] - y[p];
                out.integral_data()[at] = integral[p];
            }
            ++col;
        }
        if (i == n_steps) break;
        for (std::size_t p = 0; p < n_paths; ++p) {
            integral[p] += (x[p] - y[p]) * dt;
            x[p] = detail::euler_step(x[p], m.x, dt, sqrt_dt * rng::normal(key_x[p], i));
            y[p] = detail::euler_step(y[p], m.y, dt, sqrt_dt * rng::normal(key_y[p], i));
        }
    }
    return out;
}

}  // namespace cirdiff
