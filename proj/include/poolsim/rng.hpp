#pragma once

#include <cstdint>

namespace poolsim {

// Splittable counter-based generator (SplitMix64, Steele/Lea/Flood 2014).
// Each (seed, stream) pair selects an independent sequence; replicas use
// disjoint stream ids so runs are reproducible bit-for-bit regardless of
// execution order or thread count.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    // Uniform double in [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t state_ = 0;
    std::uint64_t gamma_ = 0;
};

} // namespace poolsim
