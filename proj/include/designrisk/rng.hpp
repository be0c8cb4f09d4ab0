#pragma once

#include <cstdint>
#include <limits>

namespace designrisk {

// Stateless 64-bit mixer (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t z);

// Derives an independent stream key from a root seed and up to two indices.
// Used so that unit k of replicate r gets the same draws regardless of how
// the work is scheduled.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// xoshiro256++, seeded through SplitMix64. Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

private:
    std::uint64_t s_[4];
};

}  // namespace designrisk
