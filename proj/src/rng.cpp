#include "poolsim/rng.hpp"

namespace poolsim {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// Stafford variant 13 of the 64-bit finalizer.
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// MurmurHash3 finalizer; used for gamma derivation so state and gamma
// mixing functions differ.
std::uint64_t mix64v(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDull;
    z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ull;
    return z ^ (z >> 33);
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
    state_ = mix64(seed + stream * kGoldenGamma);
    gamma_ = mix64v(stream + seed * kGoldenGamma) | 1ull; // gamma must be odd
}

std::uint64_t RngStream::next_u64() {
    state_ += gamma_;
    return mix64(state_);
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    if (n == 0) return 0;
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

} // namespace poolsim
