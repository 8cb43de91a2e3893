#pragma once

// Deterministic single-threaded simulation of the two-message handshake
// over an insecure channel, plus the adversary toolkit: eavesdrop,
// replay, and forge. Every run is a pure function of (server, card,
// password, channel, clock start, rng seed).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "luauth/block.hpp"
#include "luauth/protocol.hpp"
#include "luauth/wire.hpp"

namespace luauth::sim {

// Simulated clock: starts where told, moves only when advanced.
class SimClock {
 public:
  explicit SimClock(std::uint64_t start_ms = 0) : ms_(start_ms) {}
  Timestamp now() const noexcept { return Timestamp{ms_}; }
  void advance(std::uint64_t delta_ms) noexcept { ms_ += delta_ms; }

 private:
  std::uint64_t ms_;
};

// In-flight behavior. The tamper hook sees every frame that traverses
// the channel (both directions) and may mutate it; hooks that should
// touch only one direction can dispatch on wire::peek_type.
struct Channel {
  std::uint64_t delay_ms = 0;
  std::function<void(std::vector<std::uint8_t>&)> tamper_hook;
  bool drop = false;
};

// Complete record of one simulated handshake. Frames are recorded as
// delivered (after any tampering), so in honest runs they re-decode to
// the recorded messages exactly.
struct Transcript {
  LoginRequest request;                    // as built by the card
  std::vector<std::uint8_t> request_frame; // as delivered to the server
  std::optional<AuthResult> server_result; // absent if the frame was dropped
  std::vector<std::uint8_t> response_frame; // as delivered to the card
  std::optional<VerifyResult> card_result; // absent if no frame arrived
  Block card_r;                            // card's ephemeral r (test-only)
  std::optional<Block> server_r_prime;     // server's recovered r'
  Timestamp t_request_sent{};
  Timestamp t_request_received{};
  Timestamp t_response_received{};

  bool both_accepted() const {
    return server_result && accepted(*server_result) && card_result &&
           card_result->accepted;
  }
};

// Drives card -> channel -> server -> channel -> card, recording
// everything. Failures along the way become recorded verdicts, never
// exceptions.
inline Transcript run_handshake(const ServerState& server,
                                const SmartCard& card,
                                std::string_view password, Channel channel,
                                SimClock& clock, BlockRng& rng) {
  Transcript tr;
  tr.t_request_sent = clock.now();
  tr.request =
      card_login(card, card.id, password, tr.t_request_sent, rng, &tr.card_r);
  std::vector<std::uint8_t> frame = wire::encode_login_request(tr.request);
  if (channel.drop) {
    tr.request_frame = std::move(frame);
    return tr;
  }
  clock.advance(channel.delay_ms);
  if (channel.tamper_hook) channel.tamper_hook(frame);
  tr.request_frame = std::move(frame);
  tr.t_request_received = clock.now();

  const auto req = wire::decode_login_request(tr.request_frame, server.p());
  std::vector<std::uint8_t> reply;
  if (!req) {
    tr.server_result = RejectReason::kMalformed;
    reply = wire::encode_reject(RejectReason::kMalformed);
  } else {
    ServerTrace trace;
    const AuthResult result =
        server_authenticate(server, *req, tr.t_request_received, &trace);
    tr.server_result = result;
    if (accepted(result)) {
      tr.server_r_prime = trace.nonce;
      reply = wire::encode_server_response(std::get<ServerResponse>(result));
    } else {
      reply = wire::encode_reject(reject_reason(result));
    }
  }

  clock.advance(channel.delay_ms);
  if (channel.tamper_hook) channel.tamper_hook(reply);
  tr.response_frame = std::move(reply);
  tr.t_response_received = clock.now();

  switch (wire::peek_type(tr.response_frame).value_or(wire::MsgType::kReject)) {
    case wire::MsgType::kServerResponse: {
      const auto resp = wire::decode_server_response(tr.response_frame);
      if (!resp) {
        tr.card_result = VerifyResult{false, RejectReason::kMalformed};
        break;
      }
      tr.card_result = card_verify_server(card, *resp, tr.t_response_received,
                                          server.delta_t_ms());
      break;
    }
    case wire::MsgType::kReject: {
      const auto reason = wire::decode_reject(tr.response_frame);
      tr.card_result = VerifyResult{
          false, reason ? *reason : RejectReason::kMalformed};
      break;
    }
    default:
      tr.card_result = VerifyResult{false, RejectReason::kMalformed};
      break;
  }
  return tr;
}

// Everything an eavesdropper on the channel learns from one handshake:
// the eight wire-visible values and nothing else — never r, K, theta,
// phi, or any part of L.
struct Knowledge {
  std::string id;
  Block h_a;
  Block v;
  std::vector<std::uint64_t> u_col;
  Block s_a;
  Timestamp t{};
  Block m_prime;
  Timestamp t_prime{};

  // Labeled raw values, exactly one entry per captured field.
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> entries()
      const {
    auto block_bytes = [](const Block& b) {
      return std::vector<std::uint8_t>(b.bytes().begin(), b.bytes().end());
    };
    auto u64_bytes = [](std::uint64_t v) {
      std::uint8_t be[8];
      luauth::detail::put_u64_be(be, v);
      return std::vector<std::uint8_t>(be, be + 8);
    };
    std::vector<std::uint8_t> col_bytes;
    for (const std::uint64_t e : u_col) {
      const auto be = u64_bytes(e);
      col_bytes.insert(col_bytes.end(), be.begin(), be.end());
    }
    return {
        {"id", std::vector<std::uint8_t>(id.begin(), id.end())},
        {"h_a", block_bytes(h_a)},
        {"v", block_bytes(v)},
        {"u_col", std::move(col_bytes)},
        {"s_a", block_bytes(s_a)},
        {"t", u64_bytes(t.millis)},
        {"m_prime", block_bytes(m_prime)},
        {"t_prime", u64_bytes(t_prime.millis)},
    };
  }
};

// Extracts the adversary's view from a completed handshake. Requires a
// transcript whose server half actually produced a response.
inline Knowledge attack_eavesdrop(const Transcript& tr) {
  if (!tr.server_result || !accepted(*tr.server_result))
    throw std::invalid_argument(
        "attack_eavesdrop: transcript has no server response to observe");
  const auto& resp = std::get<ServerResponse>(*tr.server_result);
  return Knowledge{tr.request.id,    tr.request.h_a, tr.request.v,
                   tr.request.u_col, tr.request.s_a, tr.request.t,
                   resp.m_prime,     resp.t_prime};
}

// Re-submits the captured request frame, byte-identical, at `now`.
inline AuthResult attack_replay(const Transcript& tr,
                                const ServerState& server, Timestamp now) {
  const auto req = wire::decode_login_request(tr.request_frame, server.p());
  if (!req) return RejectReason::kMalformed;
  return server_authenticate(server, *req, now);
}

// Tries `trials` forged requests built only from eavesdropped values:
// observed v and u_col, fresh random h_a and s_a, current timestamp.
// Returns how many the server accepts.
inline std::size_t attack_forge(const Knowledge& knowledge,
                                std::string_view target_id,
                                const ServerState& server, Timestamp now,
                                BlockRng& rng, std::size_t trials) {
  std::size_t accepts = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    LoginRequest req{std::string(target_id), random_block(rng), knowledge.v,
                     knowledge.u_col,        random_block(rng), now};
    if (accepted(server_authenticate(server, req, now))) ++accepts;
  }
  return accepts;
}

}  // namespace luauth::sim
