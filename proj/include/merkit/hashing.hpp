#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace merkit {

// 128-bit content digest (leading half of SHA-256).
struct Digest128 {
  std::array<std::uint8_t, 16> bytes{};

  std::string hex() const;
  static std::optional<Digest128> from_hex(std::string_view hex);

  auto operator<=>(const Digest128&) const = default;
};

struct Digest128Hash {
  std::size_t operator()(const Digest128& d) const noexcept;
};

Digest128 digest128(std::string_view data);

// Stable across platforms and runs; leading 8 bytes of SHA-256, big-endian.
std::uint64_t stable_hash64(std::string_view data);

std::string base64_encode(std::span<const std::uint8_t> data);

}  // namespace merkit
