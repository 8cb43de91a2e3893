#pragma once

// Fixed-width 32-byte blocks: the domain of every XOR/XNOR in the
// protocol. One canonical width (the hash output size) for keys,
// identities, passwords, indices, and timestamps removes all width
// ambiguity between the values that get combined.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "luauth/errors.hpp"
#include "luauth/sha256.hpp"

namespace luauth {

struct Timestamp {
  std::uint64_t millis = 0;  // since Unix epoch
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

class Block {
 public:
  static constexpr std::size_t kSize = 32;

  constexpr Block() = default;
  explicit constexpr Block(const Bytes32& b) : b_(b) {}

  static Block filled(std::uint8_t v) {
    Bytes32 b;
    b.fill(v);
    return Block(b);
  }

  const Bytes32& bytes() const noexcept { return b_; }
  std::uint8_t* data() noexcept { return b_.data(); }
  const std::uint8_t* data() const noexcept { return b_.data(); }
  std::uint8_t operator[](std::size_t i) const { return b_[i]; }
  std::uint8_t& operator[](std::size_t i) { return b_[i]; }

  Block& operator^=(const Block& o) {
    for (std::size_t i = 0; i < kSize; ++i) b_[i] ^= o.b_[i];
    return *this;
  }
  friend Block operator^(Block a, const Block& b) { return a ^= b; }
  friend Block operator~(const Block& a) {
    Block out;
    for (std::size_t i = 0; i < kSize; ++i) out.b_[i] = ~a.b_[i];
    return out;
  }
  friend bool operator==(const Block&, const Block&) = default;

 private:
  Bytes32 b_{};
};

// Bitwise exclusive-NOR, the complement of XOR.
inline Block xnor(const Block& a, const Block& b) { return ~(a ^ b); }

inline Block hash_bytes(std::span<const std::uint8_t> data) {
  return Block(sha256(data));
}

// F_h restricted to the block domain.
inline Block hash_block(const Block& in) {
  return Block(sha256(std::span<const std::uint8_t>(in.bytes())));
}

struct BlockHasher {
  std::size_t operator()(const Block& b) const noexcept {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | b[i];
    return static_cast<std::size_t>(v);
  }
};

// Identities are 1..64 characters of [A-Za-z0-9._-].
inline bool valid_id_format(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (const char c : id) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

// Canonical block form of an identity: the digest of its UTF-8 bytes.
inline Block id_block(std::string_view id) {
  if (!valid_id_format(id)) throw BadIdFormat(std::string(id));
  return Block(sha256(id));
}

inline Block pw_block(std::span<const std::uint8_t> password) {
  if (password.empty() || password.size() > 256)
    throw BadPassword(password.size());
  return Block(sha256(password));
}

inline Block pw_block(std::string_view password) {
  return pw_block(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(password.data()),
      password.size()));
}

namespace detail {
inline void put_u64_be(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
}
inline std::uint64_t get_u64_be(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}
}  // namespace detail

// Field elements enter the block domain as 24 zero bytes followed by the
// 8-byte big-endian value.
inline Block encode_field(std::uint64_t k) {
  Block b;
  detail::put_u64_be(b.data() + 24, k);
  return b;
}

inline std::optional<std::uint64_t> decode_field(const Block& b) {
  for (std::size_t i = 0; i < 24; ++i)
    if (b[i] != 0) return std::nullopt;
  return detail::get_u64_be(b.data() + 24);
}

// 1-based index, same layout as encode_field.
inline Block encode_index(std::size_t y, std::size_t n) {
  if (y < 1 || y > n) throw IndexOutOfRange(y, n);
  return encode_field(y);
}

inline std::optional<std::size_t> decode_index(const Block& b, std::size_t n) {
  const auto v = decode_field(b);
  if (!v || *v < 1 || *v > n) return std::nullopt;
  return static_cast<std::size_t>(*v);
}

inline Block encode_timestamp(Timestamp t) { return encode_field(t.millis); }

// Deterministic block source: counter-mode expansion of a 32-byte seed
// through the hash. Not thread-safe; give each thread its own.
class BlockRng {
 public:
  explicit BlockRng(const Block& seed) : seed_(seed) {}
  explicit BlockRng(const Bytes32& seed) : seed_(Block(seed)) {}

  Block next_block() {
    std::array<std::uint8_t, 40> msg;
    std::copy(seed_.bytes().begin(), seed_.bytes().end(), msg.begin());
    detail::put_u64_be(msg.data() + 32, counter_++);
    return Block(sha256(msg));
  }

  std::uint64_t next_u64() { return detail::get_u64_be(next_block().data()); }

  // Uniform draw from [1, n] by rejection, so no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be >= 1");
    const std::uint64_t rem = (0ULL - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t u = next_u64();
      if (rem == 0 || u < 0ULL - rem) return 1 + u % n;
    }
  }

 private:
  Block seed_;
  std::uint64_t counter_ = 0;
};

inline Block random_block(BlockRng& rng) { return rng.next_block(); }

inline std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (const std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

inline std::string to_hex(const Block& b) {
  return to_hex(std::span<const std::uint8_t>(b.bytes()));
}

inline std::optional<std::vector<std::uint8_t>> bytes_from_hex(
    std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

inline std::optional<Block> block_from_hex(std::string_view hex) {
  const auto bytes = bytes_from_hex(hex);
  if (!bytes || bytes->size() != Block::kSize) return std::nullopt;
  Bytes32 b;
  std::copy(bytes->begin(), bytes->end(), b.begin());
  return Block(b);
}

}  // namespace luauth
