#pragma once

#include <cstdint>

namespace ergolab {

// Counter-based randomness: every draw is a pure function of (seed, index).
// This keeps parallel experiments reproducible regardless of scheduling and
// makes stream shifting an O(1) offset bump.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Independent substream: mixes a tag into a seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL + splitmix64(tag)));
}

struct RandomStream {
    std::uint64_t seed = 0;

    std::uint64_t bits(std::uint64_t index) const {
        return splitmix64(seed ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
    }

    // Uniform double in [0, 1).
    double u01(std::uint64_t index) const {
        return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t index, std::uint64_t n) const {
        return bits(index) % n;
    }

    RandomStream sub(std::uint64_t tag) const { return {derive_seed(seed, tag)}; }
};

}  // namespace ergolab
