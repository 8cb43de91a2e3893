#pragma once

// The two protocol roles.
//
// Setup: the server holds a secret symmetric key matrix A = L*U over
// GF(p) plus a masking secret phi. Registration hands the user a smart
// card; the server keeps no per-user record.
//
//   register (secure channel):
//     draw x, y in [1, N]
//     K     = L_row(x) . U_col(y)          (= A[x][y])
//     theta = H(id_block ^ enc(K)) ^ pw_block
//     v     = phi ^ enc_index(y)
//     card  = (id, enc(K), v, U_col(x), theta)
//
//   login (card -> server):  M = (id, H_a, v, U_col(x), S_a, T)
//     r   = fresh random block
//     H_a = enc(K) ^ H(r)
//     S_a = theta ^ pw_block ^ r
//
//   server verify + reply:  (M', T')
//     y  = dec_index(v ^ phi)
//     K' = L_row(y) . U_col(x)             (= A[y][x] = K for honest M)
//     r' = H(id_block ^ enc(K')) ^ S_a
//     accept iff H_a ^ H(r') == enc(K'), then M' = H(enc(K') XNOR enc(T'))
//
//   card verify: accept iff H(enc(K) XNOR enc(T')) == M' and T' fresh.
//
// Both sides verify each other through the same symmetric entry of A;
// neither message exposes K, r, theta, or phi in the clear.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "luauth/block.hpp"
#include "luauth/errors.hpp"
#include "luauth/matrix.hpp"

namespace luauth {

enum class RejectReason : std::uint8_t {
  kBadIdFormat = 1,
  kStaleTimestamp = 2,
  kBadIndex = 3,
  kKeyMismatch = 4,
  kReplayDetected = 5,
  kMalformed = 6,
};

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kBadIdFormat: return "bad_id_format";
    case RejectReason::kStaleTimestamp: return "stale_timestamp";
    case RejectReason::kBadIndex: return "bad_index";
    case RejectReason::kKeyMismatch: return "key_mismatch";
    case RejectReason::kReplayDetected: return "replay_detected";
    case RejectReason::kMalformed: return "malformed";
  }
  return "unknown";
}

// The issued credential. Immutable after issuance.
struct SmartCard {
  std::string id;
  Block k_block;                    // encoded pairwise key K
  Block v;                          // phi ^ encoded row index y
  std::vector<std::uint64_t> u_col; // column x of U, in the clear
  Block theta;                      // password-blinded verifier
  std::size_t n = 0;
  std::uint64_t p = 0;
  friend bool operator==(const SmartCard&, const SmartCard&) = default;
};

struct LoginRequest {
  std::string id;
  Block h_a;
  Block v;
  std::vector<std::uint64_t> u_col;
  Block s_a;
  Timestamp t;
  friend bool operator==(const LoginRequest&, const LoginRequest&) = default;
};

struct ServerResponse {
  Block m_prime;
  Timestamp t_prime;
  friend bool operator==(const ServerResponse&, const ServerResponse&) = default;
};

// Optional exact-replay rejection on top of the freshness window. One
// atomic check-and-record per request; entries expire with the window.
class ReplayCache {
 public:
  // False when the digest was already recorded and has not expired.
  bool check_and_record(const Block& digest, std::uint64_t now_ms,
                        std::uint64_t expiry_ms) {
    std::lock_guard lock(mu_);
    std::erase_if(seen_, [&](const auto& kv) { return kv.second < now_ms; });
    return seen_.try_emplace(digest, expiry_ms).second;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return seen_.size();
  }

 private:
  mutable std::mutex mu_;
  std::unordered_map<Block, std::uint64_t, BlockHasher> seen_;
};

inline constexpr std::uint64_t kDefaultFreshnessWindowMs = 30000;

// Everything the authentication server holds. The key matrix and phi
// never change after construction; the replay cache is the only mutable
// piece and is ephemeral (never persisted).
class ServerState {
 public:
  ServerState(KeyMatrix km, const Block& phi, std::uint64_t delta_t_ms,
              bool replay_cache_enabled)
      : km_(std::move(km)),
        phi_(phi),
        delta_t_ms_(delta_t_ms),
        cache_enabled_(replay_cache_enabled),
        cache_(replay_cache_enabled ? std::make_shared<ReplayCache>()
                                    : nullptr) {
    if (delta_t_ms == 0)
      throw std::invalid_argument("freshness window must be positive");
  }

  // Equality over the durable configuration: matrices, seed, phi, the
  // window, and the cache flag. Excludes the cache contents (ephemeral)
  // and the generation rejection count (diagnostic).
  friend bool operator==(const ServerState& a, const ServerState& b) {
    return a.km_.a == b.km_.a && a.km_.l == b.km_.l && a.km_.u == b.km_.u &&
           a.km_.seed == b.km_.seed && a.phi_ == b.phi_ &&
           a.delta_t_ms_ == b.delta_t_ms_ &&
           a.cache_enabled_ == b.cache_enabled_;
  }

  std::size_t n() const noexcept { return km_.a.dim(); }
  std::uint64_t p() const noexcept { return km_.a.modulus(); }
  std::uint64_t delta_t_ms() const noexcept { return delta_t_ms_; }
  const Block& phi() const noexcept { return phi_; }
  const KeyMatrix& key_matrix() const noexcept { return km_; }
  const Seed& seed() const noexcept { return km_.seed; }
  bool replay_cache_enabled() const noexcept { return cache_enabled_; }
  ReplayCache* replay_cache() const noexcept { return cache_.get(); }

 private:
  KeyMatrix km_;
  Block phi_;
  std::uint64_t delta_t_ms_;
  bool cache_enabled_;
  std::shared_ptr<ReplayCache> cache_;
};

inline bool validate_id_format(std::string_view id) {
  return valid_id_format(id);
}

namespace detail {
inline constexpr std::string_view kPhiDomainTag = "luauth.phi.v1";
}

// Deterministic server setup: the key matrix comes from the seed via
// rejection sampling and phi is derived from the seed under a fixed
// domain tag.
inline ServerState init_server(const Seed& seed, std::size_t n,
                               std::uint64_t p,
                               std::uint64_t delta_t_ms = kDefaultFreshnessWindowMs,
                               bool replay_cache_enabled = false) {
  KeyMatrix km = generate_server_matrices(seed, n, p);
  std::vector<std::uint8_t> msg(seed.begin(), seed.end());
  msg.insert(msg.end(), detail::kPhiDomainTag.begin(),
             detail::kPhiDomainTag.end());
  const Block phi = hash_bytes(msg);
  return ServerState(std::move(km), phi, delta_t_ms, replay_cache_enabled);
}

// Issues a smart card. x and y are drawn fresh and then forgotten: they
// live on neither the card nor the server.
inline SmartCard register_user(const ServerState& server, std::string_view id,
                               std::span<const std::uint8_t> password,
                               BlockRng& rng) {
  if (!validate_id_format(id)) throw BadIdFormat(std::string(id));
  const Block pw = pw_block(password);
  const std::size_t x = rng.uniform_index(server.n());
  const std::size_t y = rng.uniform_index(server.n());
  const std::uint64_t key = derive_key(server.key_matrix(), x, y);
  const Block theta = hash_block(id_block(id) ^ encode_field(key)) ^ pw;
  const Block v = server.phi() ^ encode_index(y, server.n());
  return SmartCard{std::string(id), encode_field(key),     v,
                   col(server.key_matrix().u, x), theta, server.n(),
                   server.p()};
}

inline SmartCard register_user(const ServerState& server, std::string_view id,
                               std::string_view password, BlockRng& rng) {
  return register_user(server, id,
                       std::span<const std::uint8_t>(
                           reinterpret_cast<const std::uint8_t*>(password.data()),
                           password.size()),
                       rng);
}

// Builds the login request. A wrong password is not detectable here: it
// silently corrupts S_a and the server catches it as a key mismatch.
// nonce_out exposes the ephemeral r for transcript recording only.
inline LoginRequest card_login(const SmartCard& card,
                               std::string_view entered_id,
                               std::span<const std::uint8_t> password,
                               Timestamp now, BlockRng& rng,
                               Block* nonce_out = nullptr) {
  if (entered_id != card.id)
    throw IdMismatch(std::string(entered_id), card.id);
  const Block pw = pw_block(password);
  const Block nonce = random_block(rng);
  if (nonce_out) *nonce_out = nonce;
  const Block h_a = card.k_block ^ hash_block(nonce);
  const Block s_a = card.theta ^ pw ^ nonce;
  return LoginRequest{card.id, h_a, card.v, card.u_col, s_a, now};
}

inline LoginRequest card_login(const SmartCard& card,
                               std::string_view entered_id,
                               std::string_view password, Timestamp now,
                               BlockRng& rng, Block* nonce_out = nullptr) {
  return card_login(card, entered_id,
                    std::span<const std::uint8_t>(
                        reinterpret_cast<const std::uint8_t*>(password.data()),
                        password.size()),
                    now, rng, nonce_out);
}

// Server-side values recovered during verification, exposed for
// transcript recording in tests and the simulator.
struct ServerTrace {
  Block nonce;            // r' — must equal the card's r in honest runs
  std::uint64_t key = 0;  // K recomputed from L and the presented column
  std::size_t row = 0;    // unmasked y
};

using AuthResult = std::variant<ServerResponse, RejectReason>;

inline bool accepted(const AuthResult& r) {
  return std::holds_alternative<ServerResponse>(r);
}
inline RejectReason reject_reason(const AuthResult& r) {
  return std::get<RejectReason>(r);
}

// Canonical digest of a request for exact-replay detection. Independent
// of the wire framing but covers the same fields in the same order.
inline Block request_digest(const LoginRequest& req) {
  std::vector<std::uint8_t> buf;
  buf.reserve(2 + req.id.size() + 32 * 3 + 2 + 8 * req.u_col.size() + 8);
  buf.push_back(static_cast<std::uint8_t>(req.id.size() >> 8));
  buf.push_back(static_cast<std::uint8_t>(req.id.size()));
  buf.insert(buf.end(), req.id.begin(), req.id.end());
  buf.insert(buf.end(), req.h_a.bytes().begin(), req.h_a.bytes().end());
  buf.insert(buf.end(), req.v.bytes().begin(), req.v.bytes().end());
  buf.push_back(static_cast<std::uint8_t>(req.u_col.size() >> 8));
  buf.push_back(static_cast<std::uint8_t>(req.u_col.size()));
  for (const std::uint64_t e : req.u_col) {
    std::uint8_t be[8];
    detail::put_u64_be(be, e);
    buf.insert(buf.end(), be, be + 8);
  }
  buf.insert(buf.end(), req.s_a.bytes().begin(), req.s_a.bytes().end());
  std::uint8_t be[8];
  detail::put_u64_be(be, req.t.millis);
  buf.insert(buf.end(), be, be + 8);
  return hash_bytes(buf);
}

// Full server-side verification, checks in order:
//   1. identity format
//   2. freshness: 0 <= now - T <= delta_t (future-dated is stale too)
//   3. unmask y from v
//   4. structural validity of the presented U column
//   5. recompute K from row y of L, recover r', recover the card's K
//   6. exact key equality
//   7. optional exact-replay rejection
//   8. respond with M' = H(enc(K) XNOR enc(T')), T' = now
inline AuthResult server_authenticate(const ServerState& server,
                                      const LoginRequest& req, Timestamp now,
                                      ServerTrace* trace = nullptr) {
  if (!validate_id_format(req.id)) return RejectReason::kBadIdFormat;
  if (now < req.t || now.millis - req.t.millis > server.delta_t_ms())
    return RejectReason::kStaleTimestamp;
  const auto y = decode_index(req.v ^ server.phi(), server.n());
  if (!y) return RejectReason::kBadIndex;
  if (req.u_col.size() != server.n()) return RejectReason::kMalformed;
  // The column the card presents must be a column of U verbatim. The dot
  // product alone ignores positions past y (row y of L is zero there), so
  // without this check those trailing entries would be malleable.
  if (!matches_any_column(server.key_matrix().u, req.u_col))
    return RejectReason::kMalformed;
  const std::uint64_t key =
      dot(row(server.key_matrix().l, *y), req.u_col, server.p());
  const Block tag = hash_block(id_block(req.id) ^ encode_field(key));
  const Block nonce = tag ^ req.s_a;  // r'
  const Block recovered_key = req.h_a ^ hash_block(nonce);
  if (recovered_key != encode_field(key)) return RejectReason::kKeyMismatch;
  if (auto* cache = server.replay_cache()) {
    if (!cache->check_and_record(request_digest(req), now.millis,
                                 req.t.millis + server.delta_t_ms()))
      return RejectReason::kReplayDetected;
  }
  if (trace) *trace = ServerTrace{nonce, key, *y};
  const Timestamp t_prime = now;
  const Block m_prime =
      hash_block(xnor(encode_field(key), encode_timestamp(t_prime)));
  return ServerResponse{m_prime, t_prime};
}

struct VerifyResult {
  bool accepted = false;
  std::optional<RejectReason> reason;
};

// Card-side check of the server's proof: T' must be fresh and M' must
// match the hash the card computes from its own key.
inline VerifyResult card_verify_server(const SmartCard& card,
                                       const ServerResponse& resp,
                                       Timestamp now,
                                       std::uint64_t delta_t_ms) {
  if (now < resp.t_prime || now.millis - resp.t_prime.millis > delta_t_ms)
    return {false, RejectReason::kStaleTimestamp};
  const Block expected =
      hash_block(xnor(card.k_block, encode_timestamp(resp.t_prime)));
  if (expected != resp.m_prime) return {false, RejectReason::kKeyMismatch};
  return {true, std::nullopt};
}

}  // namespace luauth
