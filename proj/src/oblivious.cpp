#include "poolsim/oblivious.hpp"

#include <cstring>
#include <stdexcept>

namespace poolsim::oblivious {

namespace {

void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& v, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= std::uint32_t(p[i]) << (8 * i);
    return x;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= std::uint64_t(p[i]) << (8 * i);
    return x;
}

} // namespace

Operator make_operator(RngStream& rng, std::uint32_t share_bits, std::uint64_t header_tag) {
    Operator op;
    for (int i = 0; i < 4; ++i) {
        std::uint64_t word = rng.next_u64();
        std::memcpy(op.seed.bytes.data() + 8 * i, &word, 8);
    }
    op.work.extra_hash = sha256(op.seed.bytes.data(), op.seed.bytes.size());
    op.work.share_bits = share_bits;
    op.work.header_tag = header_tag;
    return op;
}

Hash256 block_hash(const WorkPackage& work, std::uint64_t nonce) {
    std::uint8_t header[32 + 8 + 8];
    std::memcpy(header, work.extra_hash.data(), 32);
    std::memcpy(header + 32, &work.header_tag, 8);
    std::memcpy(header + 40, &nonce, 8);
    return sha256(header, sizeof(header));
}

bool below_power_target(const Hash256& h, std::uint32_t bits) {
    // hash < 2^(256 - bits): the top `bits` bits must all be zero.
    std::uint32_t full = bits / 8, rem = bits % 8;
    for (std::uint32_t i = 0; i < full; ++i)
        if (h[i] != 0) return false;
    if (rem && full < 32 && (h[full] >> (8 - rem)) != 0) return false;
    return true;
}

bool below_difficulty_target(const Hash256& h, std::uint32_t difficulty) {
    if (difficulty == 0) throw std::invalid_argument("difficulty must be >= 1");
    // hash < 2^256 / D  <=>  hash * D < 2^256 (exact big-endian multiply).
    std::uint64_t carry = 0;
    for (int i = 31; i >= 0; --i) {
        carry = std::uint64_t(h[i]) * difficulty + (carry >> 8);
        // low byte of carry is this digit of the product; keep rolling
    }
    return (carry >> 8) == 0; // overflow past 256 bits means hash*D >= 2^256
}

bool miner_check_share(const WorkPackage& work, std::uint64_t nonce) {
    return below_power_target(block_hash(work, nonce), work.share_bits);
}

bool operator_check_block(const ShareSubmission& share, const WorkPackage& work,
                          const SecretSeed& seed, std::uint32_t difficulty) {
    Hash256 expect_extra = sha256(seed.bytes.data(), seed.bytes.size());
    if (expect_extra != work.extra_hash)
        throw std::runtime_error("protocol violation: ExtraHash does not match SecretSeed");
    Hash256 recomputed = block_hash(work, share.nonce);
    if (recomputed != share.hash)
        throw std::runtime_error("protocol violation: submitted hash does not match header");
    std::uint8_t concat[64];
    std::memcpy(concat, share.hash.data(), 32);
    std::memcpy(concat + 32, seed.bytes.data(), 32);
    Hash256 secret_hash = sha256(concat, sizeof(concat));
    return below_difficulty_target(secret_hash, difficulty);
}

std::vector<std::uint8_t> encode_work(const WorkPackage& work) {
    std::vector<std::uint8_t> payload;
    payload.insert(payload.end(), work.extra_hash.begin(), work.extra_hash.end());
    put_u32(payload, work.share_bits);
    put_u64(payload, work.header_tag);
    std::vector<std::uint8_t> out;
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

WorkPackage decode_work(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw std::runtime_error("work record: truncated length prefix");
    std::uint32_t len = get_u32(bytes.data());
    if (len != 44 || bytes.size() != 4 + len)
        throw std::runtime_error("work record: bad length");
    WorkPackage w;
    std::memcpy(w.extra_hash.data(), bytes.data() + 4, 32);
    w.share_bits = get_u32(bytes.data() + 36);
    w.header_tag = get_u64(bytes.data() + 40);
    return w;
}

std::vector<std::uint8_t> encode_share(const ShareSubmission& s) {
    std::vector<std::uint8_t> out;
    put_u32(out, 40);
    put_u64(out, s.nonce);
    out.insert(out.end(), s.hash.begin(), s.hash.end());
    return out;
}

ShareSubmission decode_share(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw std::runtime_error("share record: truncated length prefix");
    std::uint32_t len = get_u32(bytes.data());
    if (len != 40 || bytes.size() != 4 + len)
        throw std::runtime_error("share record: bad length");
    ShareSubmission s;
    s.nonce = get_u64(bytes.data() + 4);
    std::memcpy(s.hash.data(), bytes.data() + 12, 32);
    return s;
}

} // namespace poolsim::oblivious
