#pragma once

#include <cstdint>
#include <random>

namespace pdmfc {

/// splitmix64 finalizer; full-period bijective mixer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic sub-seed for a labeled purpose (baseline run, iteration k,
/// tariff class, ...). Independent of execution order and worker count.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) {
    return mix64(mix64(seed) ^ mix64(label + 0x632BE59BD9B4E019ULL));
}

/// Per-trajectory random stream. Each trajectory's stream depends only on
/// (seed, index), so populations are reproducible under any parallel schedule.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t index)
        : eng_(derive_seed(seed, index) | 1ULL) {}

    /// Uniform double in [0, 1) with the full 53-bit mantissa; engine-portable
    /// (mt19937_64 output is pinned by the standard).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace pdmfc
