#pragma once

// Binary framing for the two protocol messages plus an explicit reject
// frame. Big-endian throughout.
//
//   frame  := magic "LUAK" | version 0x01 | msg_type u8 | len u32 | payload
//   login  := idlen u16 | id | H_a 32 | v 32 | n u16 | n * u64 | S_a 32 | T u64
//   reply  := M' 32 | T' u64
//   reject := reason u8
//
// Decoders are total: any malformed input yields nullopt, never a throw
// or a crash. Trailing bytes after the payload are malformed.

#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "luauth/block.hpp"
#include "luauth/errors.hpp"
#include "luauth/protocol.hpp"

namespace luauth::wire {

inline constexpr std::uint8_t kMagic[4] = {'L', 'U', 'A', 'K'};
inline constexpr std::uint8_t kVersion = 0x01;

enum class MsgType : std::uint8_t {
  kLoginRequest = 0x01,
  kServerResponse = 0x02,
  kReject = 0x03,
};

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8)
      out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8)
      out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void bytes(std::span<const std::uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::optional<std::uint8_t> u8() {
    if (pos_ + 1 > in_.size()) return std::nullopt;
    return in_[pos_++];
  }
  std::optional<std::uint16_t> u16() {
    if (pos_ + 2 > in_.size()) return std::nullopt;
    const std::uint16_t v = static_cast<std::uint16_t>(
        (static_cast<std::uint16_t>(in_[pos_]) << 8) | in_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::optional<std::uint32_t> u32() {
    if (pos_ + 4 > in_.size()) return std::nullopt;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::optional<std::uint64_t> u64() {
    if (pos_ + 8 > in_.size()) return std::nullopt;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_ + i];
    pos_ += 8;
    return v;
  }
  std::optional<std::span<const std::uint8_t>> bytes(std::size_t len) {
    if (len > in_.size() - pos_ || pos_ + len > in_.size())
      return std::nullopt;
    auto out = in_.subspan(pos_, len);
    pos_ += len;
    return out;
  }
  std::optional<Block> block() {
    auto b = bytes(Block::kSize);
    if (!b) return std::nullopt;
    Block out;
    std::memcpy(out.data(), b->data(), Block::kSize);
    return out;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

inline void frame_header(ByteWriter& w, MsgType type, std::uint32_t len) {
  w.bytes(kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(type));
  w.u32(len);
}

// Checks magic/version/type and returns a reader over the payload.
inline std::optional<ByteReader> open_frame(std::span<const std::uint8_t> in,
                                            MsgType want) {
  ByteReader r(in);
  auto magic = r.bytes(4);
  if (!magic || std::memcmp(magic->data(), kMagic, 4) != 0)
    return std::nullopt;
  const auto ver = r.u8();
  if (!ver || *ver != kVersion) return std::nullopt;
  const auto type = r.u8();
  if (!type || *type != static_cast<std::uint8_t>(want)) return std::nullopt;
  const auto len = r.u32();
  if (!len) return std::nullopt;
  auto payload = r.bytes(*len);
  if (!payload || !r.done()) return std::nullopt;
  return ByteReader(*payload);
}

}  // namespace detail

// Type of a framed message, if the header is well-formed.
inline std::optional<MsgType> peek_type(std::span<const std::uint8_t> in) {
  if (in.size() < 6) return std::nullopt;
  if (std::memcmp(in.data(), kMagic, 4) != 0) return std::nullopt;
  if (in[4] != kVersion) return std::nullopt;
  const std::uint8_t t = in[5];
  if (t < 0x01 || t > 0x03) return std::nullopt;
  return static_cast<MsgType>(t);
}

inline std::vector<std::uint8_t> encode_login_request(const LoginRequest& req) {
  if (req.id.size() > 0xFFFF) throw LengthMismatch(req.id.size(), 0xFFFF);
  if (req.u_col.size() > 0xFFFF)
    throw LengthMismatch(req.u_col.size(), 0xFFFF);
  detail::ByteWriter body;
  body.u16(static_cast<std::uint16_t>(req.id.size()));
  body.bytes(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(req.id.data()), req.id.size()));
  body.bytes(req.h_a.bytes());
  body.bytes(req.v.bytes());
  body.u16(static_cast<std::uint16_t>(req.u_col.size()));
  for (const std::uint64_t e : req.u_col) body.u64(e);
  body.bytes(req.s_a.bytes());
  body.u64(req.t.millis);
  const auto payload = body.take();
  detail::ByteWriter w;
  detail::frame_header(w, MsgType::kLoginRequest,
                       static_cast<std::uint32_t>(payload.size()));
  w.bytes(payload);
  return w.take();
}

// p bounds the element values; anything >= p on the wire is malformed.
inline std::optional<LoginRequest> decode_login_request(
    std::span<const std::uint8_t> in, std::uint64_t p) {
  auto r = detail::open_frame(in, MsgType::kLoginRequest);
  if (!r) return std::nullopt;
  const auto idlen = r->u16();
  if (!idlen) return std::nullopt;
  const auto idb = r->bytes(*idlen);
  if (!idb) return std::nullopt;
  LoginRequest req;
  req.id.assign(reinterpret_cast<const char*>(idb->data()), idb->size());
  const auto h_a = r->block();
  const auto v = r->block();
  if (!h_a || !v) return std::nullopt;
  req.h_a = *h_a;
  req.v = *v;
  const auto n = r->u16();
  if (!n) return std::nullopt;
  req.u_col.reserve(*n);
  for (std::uint16_t i = 0; i < *n; ++i) {
    const auto e = r->u64();
    if (!e || *e >= p) return std::nullopt;
    req.u_col.push_back(*e);
  }
  const auto s_a = r->block();
  if (!s_a) return std::nullopt;
  req.s_a = *s_a;
  const auto t = r->u64();
  if (!t || !r->done()) return std::nullopt;
  req.t = Timestamp{*t};
  return req;
}

inline std::vector<std::uint8_t> encode_server_response(
    const ServerResponse& resp) {
  detail::ByteWriter w;
  detail::frame_header(w, MsgType::kServerResponse, 32 + 8);
  w.bytes(resp.m_prime.bytes());
  w.u64(resp.t_prime.millis);
  return w.take();
}

inline std::optional<ServerResponse> decode_server_response(
    std::span<const std::uint8_t> in) {
  auto r = detail::open_frame(in, MsgType::kServerResponse);
  if (!r) return std::nullopt;
  const auto m = r->block();
  if (!m) return std::nullopt;
  const auto t = r->u64();
  if (!t || !r->done()) return std::nullopt;
  return ServerResponse{*m, Timestamp{*t}};
}

inline std::vector<std::uint8_t> encode_reject(RejectReason reason) {
  detail::ByteWriter w;
  detail::frame_header(w, MsgType::kReject, 1);
  w.u8(static_cast<std::uint8_t>(reason));
  return w.take();
}

inline std::optional<RejectReason> decode_reject(
    std::span<const std::uint8_t> in) {
  auto r = detail::open_frame(in, MsgType::kReject);
  if (!r) return std::nullopt;
  const auto code = r->u8();
  if (!code || !r->done()) return std::nullopt;
  if (*code < 1 || *code > 6) return std::nullopt;
  return static_cast<RejectReason>(*code);
}

}  // namespace luauth::wire
