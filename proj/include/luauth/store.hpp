#pragma once

// Versioned, deterministic persistence for server state and issued
// cards. Big-endian fixed layouts, each file sealed by a trailing
// integrity digest over everything before it.
//
//   server := "LUSV" | 0x01 | p u64 | n u16 | delta_t u64 | flags u8
//           | phi 32 | seed 32 | L n^2 * u64 | U n^2 * u64 | digest 32
//   card   := "LUCD" | 0x01 | p u64 | n u16 | idlen u16 | id
//           | k_block 32 | v 32 | theta 32 | u_col n * u64
//           | hash-tag u8 (0x01) | digest 32
//
// The digest chains 32-byte zero-padded chunks: state starts all-zero
// and each chunk folds in as state = hash(state ^ chunk).
//
// The server file deliberately excludes the replay cache (ephemeral)
// and the generation rejection count (diagnostic only). Card files hold
// the key block and theta in the clear, exactly as the issued card
// does; at-rest encryption is out of scope.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "luauth/block.hpp"
#include "luauth/errors.hpp"
#include "luauth/matrix.hpp"
#include "luauth/protocol.hpp"

namespace luauth::store {

class StoreError : public std::runtime_error {
 public:
  enum class Kind {
    kBadMagic,
    kBadVersion,
    kDigestMismatch,
    kInvariantViolation,
    kTruncated,
  };

  StoreError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Filesystem-level failure (missing file, unwritable path) — a usage
// problem, distinct from a corrupt or foreign file.
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kServerMagic[4] = {'L', 'U', 'S', 'V'};
inline constexpr std::uint8_t kCardMagic[4] = {'L', 'U', 'C', 'D'};
inline constexpr std::uint8_t kStoreVersion = 0x01;
inline constexpr std::uint8_t kHashTagStandard256 = 0x01;
inline constexpr std::uint8_t kFlagReplayCache = 0x01;

// Chained digest over the payload: zero-padded 32-byte chunks folded
// into an all-zero state by XOR-then-hash.
inline Block integrity_digest(std::span<const std::uint8_t> payload) {
  Block state;
  for (std::size_t off = 0; off < payload.size(); off += Block::kSize) {
    Block chunk;
    const std::size_t len = std::min(Block::kSize, payload.size() - off);
    std::memcpy(chunk.data(), payload.data() + off, len);
    state = hash_block(state ^ chunk);
  }
  return state;
}

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  std::uint8_t be[8];
  luauth::detail::put_u64_be(be, v);
  out.insert(out.end(), be, be + 8);
}

inline void put_block(std::vector<std::uint8_t>& out, const Block& b) {
  out.insert(out.end(), b.bytes().begin(), b.bytes().end());
}

// Sequential reader that reports underruns as Truncated.
class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> in) : in_(in) {}

  std::span<const std::uint8_t> take(std::size_t len) {
    if (len > in_.size() - pos_)
      throw StoreError(StoreError::Kind::kTruncated, "file is truncated");
    const auto out = in_.subspan(pos_, len);
    pos_ += len;
    return out;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    const auto b = take(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
  }
  std::uint64_t u64() {
    const auto b = take(8);
    return luauth::detail::get_u64_be(b.data());
  }
  Block block() {
    const auto b = take(Block::kSize);
    Block out;
    std::memcpy(out.data(), b.data(), Block::kSize);
    return out;
  }
  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

// Checks magic and version, leaving the cursor just past them.
inline void open_store(Cursor& c, const std::uint8_t (&magic)[4],
                       const char* what) {
  const auto m = c.take(4);
  if (std::memcmp(m.data(), magic, 4) != 0)
    throw StoreError(StoreError::Kind::kBadMagic,
                     std::string("not a ") + what + " file (bad magic)");
  const std::uint8_t ver = c.u8();
  if (ver != kStoreVersion)
    throw StoreError(StoreError::Kind::kBadVersion,
                     "unsupported file version " + std::to_string(ver));
}

// Digest check for the trailing 32 bytes against everything before.
inline void check_digest(std::span<const std::uint8_t> file,
                         std::size_t payload_len) {
  Block stored;
  std::memcpy(stored.data(), file.data() + payload_len, Block::kSize);
  if (integrity_digest(file.subspan(0, payload_len)) != stored)
    throw StoreError(StoreError::Kind::kDigestMismatch,
                     "integrity digest mismatch");
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_server(const ServerState& state) {
  const std::size_t n = state.n();
  std::vector<std::uint8_t> out;
  out.reserve(4 + 1 + 8 + 2 + 8 + 1 + 32 + 32 + 16 * n * n + 32);
  out.insert(out.end(), kServerMagic, kServerMagic + 4);
  out.push_back(kStoreVersion);
  detail::put_u64(out, state.p());
  detail::put_u16(out, static_cast<std::uint16_t>(n));
  detail::put_u64(out, state.delta_t_ms());
  out.push_back(state.replay_cache_enabled() ? kFlagReplayCache : 0);
  detail::put_block(out, state.phi());
  out.insert(out.end(), state.seed().begin(), state.seed().end());
  for (const std::uint64_t e : state.key_matrix().l.entries())
    detail::put_u64(out, e);
  for (const std::uint64_t e : state.key_matrix().u.entries())
    detail::put_u64(out, e);
  detail::put_block(out, integrity_digest(out));
  return out;
}

inline ServerState load_server_bytes(std::span<const std::uint8_t> file) {
  detail::Cursor c(file);
  detail::open_store(c, kServerMagic, "server state");
  const std::uint64_t p = c.u64();
  const std::uint16_t n = c.u16();
  if (n < 2)
    throw StoreError(StoreError::Kind::kInvariantViolation,
                     "matrix dimension must be at least 2");
  const std::size_t expected = 4 + 1 + 8 + 2 + 8 + 1 + 32 + 32 +
                               16 * std::size_t(n) * n + 32;
  if (file.size() < expected)
    throw StoreError(StoreError::Kind::kTruncated, "file is truncated");
  if (file.size() > expected)
    throw StoreError(StoreError::Kind::kInvariantViolation,
                     "trailing bytes after digest");
  detail::check_digest(file, expected - 32);
  const std::uint64_t delta_t_ms = c.u64();
  const std::uint8_t flags = c.u8();
  if (delta_t_ms == 0 || (flags & ~kFlagReplayCache) != 0)
    throw StoreError(StoreError::Kind::kInvariantViolation,
                     "invalid freshness window or flags");
  const Block phi = c.block();
  Seed seed;
  const auto seed_bytes = c.take(seed.size());
  std::memcpy(seed.data(), seed_bytes.data(), seed.size());
  KeyMatrix km{FieldMatrix(n, p), FieldMatrix(n, p), FieldMatrix(n, p), seed,
               0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) km.l(i, j) = c.u64();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) km.u(i, j) = c.u64();
  km.a = multiply(km.l, km.u);
  if (!key_matrix_valid(km))
    throw StoreError(StoreError::Kind::kInvariantViolation,
                     "stored matrices violate key-matrix invariants");
  return ServerState(std::move(km), phi, delta_t_ms,
                     (flags & kFlagReplayCache) != 0);
}

inline std::vector<std::uint8_t> serialize_card(const SmartCard& card) {
  if (card.id.size() > 0xFFFF)
    throw LengthMismatch(card.id.size(), 0xFFFF);
  if (card.u_col.size() != card.n)
    throw LengthMismatch(card.u_col.size(), card.n);
  std::vector<std::uint8_t> out;
  out.reserve(4 + 1 + 8 + 2 + 2 + card.id.size() + 32 * 3 +
              8 * card.u_col.size() + 1 + 32);
  out.insert(out.end(), kCardMagic, kCardMagic + 4);
  out.push_back(kStoreVersion);
  detail::put_u64(out, card.p);
  detail::put_u16(out, static_cast<std::uint16_t>(card.n));
  detail::put_u16(out, static_cast<std::uint16_t>(card.id.size()));
  out.insert(out.end(), card.id.begin(), card.id.end());
  detail::put_block(out, card.k_block);
  detail::put_block(out, card.v);
  detail::put_block(out, card.theta);
  for (const std::uint64_t e : card.u_col) detail::put_u64(out, e);
  out.push_back(kHashTagStandard256);
  detail::put_block(out, integrity_digest(out));
  return out;
}

inline SmartCard load_card_bytes(std::span<const std::uint8_t> file) {
  detail::Cursor c(file);
  detail::open_store(c, kCardMagic, "smart card");
  const std::uint64_t p = c.u64();
  const std::uint16_t n = c.u16();
  const std::uint16_t idlen = c.u16();
  const std::size_t expected =
      4 + 1 + 8 + 2 + 2 + std::size_t(idlen) + 32 * 3 + 8 * std::size_t(n) +
      1 + 32;
  if (file.size() < expected)
    throw StoreError(StoreError::Kind::kTruncated, "file is truncated");
  if (file.size() > expected)
    throw StoreError(StoreError::Kind::kInvariantViolation,
                     "trailing bytes after digest");
  detail::check_digest(file, expected - 32);
  SmartCard card;
  card.p = p;
  card.n = n;
  const auto idb = c.take(idlen);
  card.id.assign(reinterpret_cast<const char*>(idb.data()), idb.size());
  card.k_block = c.block();
  card.v = c.block();
  card.theta = c.block();
  card.u_col.reserve(n);
  for (std::uint16_t i = 0; i < n; ++i) card.u_col.push_back(c.u64());
  const std::uint8_t tag = c.u8();
  if (tag != kHashTagStandard256)
    throw StoreError(StoreError::Kind::kInvariantViolation,
                     "unsupported hash-algorithm tag " + std::to_string(tag));
  if (n < 2 || p < 2 || !valid_id_format(card.id))
    throw StoreError(StoreError::Kind::kInvariantViolation,
                     "stored card fields violate invariants");
  for (const std::uint64_t e : card.u_col)
    if (e >= p)
      throw StoreError(StoreError::Kind::kInvariantViolation,
                       "field element out of range");
  return card;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path.string());
  return data;
}

inline void write_file(const std::filesystem::path& path,
                       std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

inline void save_server(const ServerState& state,
                        const std::filesystem::path& path) {
  write_file(path, serialize_server(state));
}

inline ServerState load_server(const std::filesystem::path& path) {
  return load_server_bytes(read_file(path));
}

inline void save_card(const SmartCard& card,
                      const std::filesystem::path& path) {
  write_file(path, serialize_card(card));
}

inline SmartCard load_card(const std::filesystem::path& path) {
  return load_card_bytes(read_file(path));
}

}  // namespace luauth::store
