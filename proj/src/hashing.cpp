#include "merkit/hashing.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <cstring>

namespace merkit {

namespace {

std::array<std::uint8_t, SHA256_DIGEST_LENGTH> sha256(std::string_view data) {
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> out{};
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data());
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string Digest128::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::optional<Digest128> Digest128::from_hex(std::string_view hex) {
  if (hex.size() != 32) return std::nullopt;
  Digest128 d;
  for (std::size_t i = 0; i < 16; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    d.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return d;
}

std::size_t Digest128Hash::operator()(const Digest128& d) const noexcept {
  std::uint64_t v = 0;
  std::memcpy(&v, d.bytes.data(), sizeof(v));
  return static_cast<std::size_t>(v);
}

Digest128 digest128(std::string_view data) {
  const auto full = sha256(data);
  Digest128 d;
  std::memcpy(d.bytes.data(), full.data(), d.bytes.size());
  return d;
}

std::uint64_t stable_hash64(std::string_view data) {
  const auto full = sha256(data);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | full[i];
  return v;
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  if (data.empty()) return out;
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                      static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

}  // namespace merkit
