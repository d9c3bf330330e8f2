#pragma once

#include <cstdint>
#include <vector>

#include "poolsim/rng.hpp"
#include "poolsim/sha256.hpp"

namespace poolsim::oblivious {

// Work-package protocol hiding block validity from miners: the operator keeps
// SecretSeed private and publishes ExtraHash = H(SecretSeed) in the header.
// A share is valid when the block hash clears the share target; it is a block
// when SecretHash = H(block hash || SecretSeed) additionally clears 2^256/D.
//
// Byte records are length-prefixed (u32 little-endian length, then payload).
// Hash comparisons treat the 32 bytes as a big-endian 256-bit integer.

struct WorkPackage {
    Hash256 extra_hash;        // H(SecretSeed), part of the hashed header
    std::uint32_t share_bits;  // share target = 2^(256 - share_bits)
    std::uint64_t header_tag;  // opaque job id mixed into the header
};

struct SecretSeed {
    std::array<std::uint8_t, 32> bytes;
};

struct Operator {
    SecretSeed seed;
    WorkPackage work;
};

// share_bits = 32 reproduces the full-scale protocol; desk-scale tests widen
// the target (e.g. share_bits = 10) so runs finish in seconds.
Operator make_operator(RngStream& rng, std::uint32_t share_bits, std::uint64_t header_tag);

Hash256 block_hash(const WorkPackage& work, std::uint64_t nonce);

// Miner side: only the share target is checkable without the seed.
bool miner_check_share(const WorkPackage& work, std::uint64_t nonce);

struct ShareSubmission {
    std::uint64_t nonce;
    Hash256 hash; // block hash claimed by the miner
};

// Operator side: verifies the package against the seed, then tests
// SecretHash against 2^256 / D. Throws on ExtraHash/seed mismatch or on a
// submission whose hash does not match the work.
bool operator_check_block(const ShareSubmission& share, const WorkPackage& work,
                          const SecretSeed& seed, std::uint32_t difficulty);

// hash < 2^(256 - bits)
bool below_power_target(const Hash256& h, std::uint32_t bits);
// hash * D < 2^256, i.e. hash < 2^256 / D exactly
bool below_difficulty_target(const Hash256& h, std::uint32_t difficulty);

// Length-prefixed wire encoding.
std::vector<std::uint8_t> encode_work(const WorkPackage& work);
WorkPackage decode_work(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_share(const ShareSubmission& s);
ShareSubmission decode_share(const std::vector<std::uint8_t>& bytes);

} // namespace poolsim::oblivious
