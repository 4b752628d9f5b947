#include "archilens/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <stdexcept>

#include "archilens/errors.hpp"

namespace archilens {

namespace {

std::array<unsigned char, 32> sha256_raw(std::string_view data) {
    std::array<unsigned char, 32> out{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, out.data(), &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok || len != out.size()) throw std::runtime_error("SHA-256 computation failed");
    return out;
}

std::uint64_t le64(const unsigned char* bytes) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
    return v;
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    static const char* kHex = "0123456789abcdef";
    const auto raw = sha256_raw(data);
    std::string hex;
    hex.reserve(64);
    for (unsigned char b : raw) {
        hex.push_back(kHex[b >> 4]);
        hex.push_back(kHex[b & 0xf]);
    }
    return hex;
}

std::uint64_t sha256_seed(std::string_view data) {
    const auto raw = sha256_raw(data);
    return le64(raw.data());
}

std::uint64_t hex_digest_seed(std::string_view hex_digest) {
    if (hex_digest.size() != 64) throw DomainError("digest must be 64 hex characters");
    std::array<unsigned char, 8> bytes{};
    for (int i = 0; i < 8; ++i) {
        const int hi = hex_nibble(hex_digest[2 * i]);
        const int lo = hex_nibble(hex_digest[2 * i + 1]);
        if (hi < 0 || lo < 0) throw DomainError("digest must be lowercase hex");
        bytes[static_cast<std::size_t>(i)] = static_cast<unsigned char>((hi << 4) | lo);
    }
    for (std::size_t i = 16; i < 64; ++i) {
        if (hex_nibble(hex_digest[i]) < 0) throw DomainError("digest must be lowercase hex");
    }
    return le64(bytes.data());
}

}  // namespace archilens
