#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace poolsim {

using Hash256 = std::array<std::uint8_t, 32>;

// FIPS 180-2 SHA-256 of a byte buffer.
Hash256 sha256(const std::uint8_t* data, std::size_t len);

template <typename Container>
Hash256 sha256(const Container& c) {
    return sha256(reinterpret_cast<const std::uint8_t*>(c.data()), c.size() * sizeof(*c.data()));
}

} // namespace poolsim
