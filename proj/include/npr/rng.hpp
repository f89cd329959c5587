#pragma once

// Deterministic RNG for the sampling experiments. splitmix64 streams derived
// from (seed, stream-id) pairs: bit-for-bit reproducible across platforms and
// independent per task.

#include <cstdint>

namespace npr {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    // stream derivation: hash the pair (seed, stream)
    SplitMix64(std::uint64_t seed, std::uint64_t stream)
        : state_(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1))) {
        next();
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return (next() >> 11) * 0x1.0p-53; }

    bool coin() { return (next() & 1) != 0; }

private:
    std::uint64_t state_;
};

}  // namespace npr
