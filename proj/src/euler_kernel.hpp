#pragma once

#include <algorithm>
#include <cmath>

#include "cirdiff/core_model.hpp"

namespace cirdiff::detail {

// One truncated Euler step; only the argument of the root is clamped.
inline double euler_step(double z, const CirParams& p, double dt, double dw) {
    return z + p.k * (p.theta - z) * dt + p.sigma * std::sqrt(std::max(z, 0.0)) * dw;
}

}  // namespace cirdiff::detail
