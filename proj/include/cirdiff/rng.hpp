#pragma once
//
// Counter-based Gaussian streams.
//
// Every (seed, path, leg) triple owns an independent SplitMix64 sequence whose
// i-th element is a pure function of the key and i, so results do not depend
// on which thread simulates a path or in which order paths are visited.
//

#include <cstdint>

namespace cirdiff::rng {

/// SplitMix64 output function (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Key of the substream (seed, a, b), e.g. (seed, path index, leg tag).
constexpr std::uint64_t substream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) + a * kGolden) + b * kGolden);
}

/// i-th raw 64-bit draw of the stream with the given key.
constexpr std::uint64_t draw_u64(std::uint64_t key, std::uint64_t i) noexcept {
    return mix64(key + (i + 1) * kGolden);
}

/// Uniform on the open interval (0, 1) with 53-bit resolution.
constexpr double to_open_unit(std::uint64_t u) noexcept {
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal quantile, Wichura's AS 241 (PPND16), relative accuracy ~1e-16.
double normal_quantile(double p);

/// i-th standard normal of the stream, by inversion.
inline double normal(std::uint64_t key, std::uint64_t i) {
    return normal_quantile(to_open_unit(draw_u64(key, i)));
}

/// Sequential view of one substream.
class Stream {
public:
    explicit Stream(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next_u64() noexcept { return draw_u64(key_, counter_++); }
    double uniform() noexcept { return to_open_unit(next_u64()); }
    double normal() { return normal_quantile(uniform()); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace cirdiff::rng
