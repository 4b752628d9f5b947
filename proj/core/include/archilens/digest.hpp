#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace archilens {

/// SHA-256 of the input bytes as 64 lowercase hex characters.
std::string sha256_hex(std::string_view data);

/// First eight bytes of SHA-256(data), interpreted little-endian, as a
/// 64-bit seed. Used wherever strings must be folded into PRNG seeds.
std::uint64_t sha256_seed(std::string_view data);

/// Parse the first 16 hex characters of an existing digest string into the
/// same little-endian 64-bit value sha256_seed would produce for the
/// original preimage. Throws DomainError if the string is not 64 lowercase
/// hex characters.
std::uint64_t hex_digest_seed(std::string_view hex_digest);

}  // namespace archilens
