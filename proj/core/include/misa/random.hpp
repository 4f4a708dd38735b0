#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace misa {

using Rng = std::mt19937_64;

// Child seed = mix(master, label, index). Distinct labels give independent
// streams, so adding draws to one stage never shifts another stage's draws.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
    return Rng(derive_seed(master, label, index));
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

} // namespace misa
