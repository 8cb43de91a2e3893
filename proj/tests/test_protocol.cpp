// The two protocol roles: registration algebra, the login handshake,
// every server rejection path, card-side verification, and the
// no-per-user-storage property.

#include "luauth/protocol.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <string>
#include <vector>

using namespace luauth;

namespace {

constexpr std::uint64_t kP = gf::kDefaultModulus;
constexpr std::uint64_t kT0 = 1'700'000'000'000;

Seed seed_of(std::uint8_t tag) {
  Seed s{};
  s[0] = tag;
  return s;
}

BlockRng seeded_rng(std::uint8_t tag) {
  Bytes32 s{};
  s[31] = tag;
  return BlockRng(s);
}

struct Fixture {
  ServerState server;
  SmartCard card;
  BlockRng rng;

  explicit Fixture(std::uint8_t tag = 1, std::size_t n = 8,
                   bool cache = false)
      : server(init_server(seed_of(tag), n, kP, 30000, cache)),
        card(SmartCard{}),
        rng(seeded_rng(tag)) {
    card = register_user(server, "alice_01", std::string_view("hunter2"), rng);
  }

  LoginRequest honest_request(Block* nonce = nullptr,
                              std::uint64_t at = kT0) {
    return card_login(card, card.id, std::string_view("hunter2"),
                      Timestamp{at}, rng, nonce);
  }
};

TEST(Register, CardAlgebraMatchesDefinitions) {
  Fixture fx;
  // theta ^ pw_block(password) == hash(id_block ^ k_block)
  const Block lhs = fx.card.theta ^ pw_block(std::string_view("hunter2"));
  EXPECT_EQ(lhs, hash_block(id_block(fx.card.id) ^ fx.card.k_block));
  // v ^ phi decodes to some y in [1, N]
  const auto y = decode_index(fx.card.v ^ fx.server.phi(), fx.server.n());
  ASSERT_TRUE(y.has_value());
  EXPECT_GE(*y, 1u);
  EXPECT_LE(*y, fx.server.n());
  // The card's key block encodes an actual matrix entry.
  const auto k = decode_field(fx.card.k_block);
  ASSERT_TRUE(k.has_value());
  EXPECT_LT(*k, fx.server.p());
  // u_col is a verbatim column of U.
  EXPECT_TRUE(matches_any_column(fx.server.key_matrix().u, fx.card.u_col));
  EXPECT_EQ(fx.card.n, fx.server.n());
}

TEST(Register, RejectsBadInputs) {
  Fixture fx;
  EXPECT_THROW(
      register_user(fx.server, "two words", std::string_view("pw"), fx.rng),
      BadIdFormat);
  EXPECT_THROW(
      register_user(fx.server, "alice", std::string_view(""), fx.rng),
      BadPassword);
}

TEST(Login, RequestAlgebraMatchesDefinitions) {
  Fixture fx;
  Block r;
  const LoginRequest req = fx.honest_request(&r);
  EXPECT_EQ(req.h_a ^ hash_block(r), fx.card.k_block);
  // With the correct password, theta ^ pw cancels to the hash term.
  EXPECT_EQ(req.s_a, hash_block(id_block(fx.card.id) ^ fx.card.k_block) ^ r);
  EXPECT_EQ(req.v, fx.card.v);
  EXPECT_EQ(req.u_col, fx.card.u_col);
  EXPECT_EQ(req.t.millis, kT0);
}

TEST(Login, WrongEnteredIdIsLocalError) {
  Fixture fx;
  EXPECT_THROW(card_login(fx.card, "bob", std::string_view("hunter2"),
                          Timestamp{kT0}, fx.rng),
               IdMismatch);
}

TEST(Handshake, HonestRunAcceptsBothSides) {
  Fixture fx;
  Block r;
  const LoginRequest req = fx.honest_request(&r);
  ServerTrace trace;
  const AuthResult res =
      server_authenticate(fx.server, req, Timestamp{kT0 + 10}, &trace);
  ASSERT_TRUE(accepted(res));
  EXPECT_EQ(trace.nonce, r) << "server must recover the card's exact r";
  EXPECT_EQ(encode_field(trace.key), fx.card.k_block);

  const auto& resp = std::get<ServerResponse>(res);
  EXPECT_EQ(resp.t_prime.millis, kT0 + 10);
  const VerifyResult v =
      card_verify_server(fx.card, resp, Timestamp{kT0 + 20}, 30000);
  EXPECT_TRUE(v.accepted);
}

TEST(Handshake, CompletenessAcrossDimensions) {
  for (std::size_t n = 2; n <= 16; ++n) {
    Fixture fx(static_cast<std::uint8_t>(n), n);
    for (int run = 0; run < 8; ++run) {
      Block r;
      const LoginRequest req = fx.honest_request(&r, kT0 + run);
      ServerTrace trace;
      const AuthResult res = server_authenticate(
          fx.server, req, Timestamp{kT0 + run + 1}, &trace);
      ASSERT_TRUE(accepted(res)) << "n=" << n << " run=" << run;
      ASSERT_EQ(trace.nonce, r);
      ASSERT_TRUE(card_verify_server(fx.card,
                                     std::get<ServerResponse>(res),
                                     Timestamp{kT0 + run + 2}, 30000)
                      .accepted);
    }
  }
}

TEST(Handshake, WrongPasswordIsKeyMismatch) {
  Fixture fx;
  for (int i = 0; i < 20; ++i) {
    const LoginRequest req =
        card_login(fx.card, fx.card.id,
                   std::string_view("wrong password"), Timestamp{kT0}, fx.rng);
    const AuthResult res =
        server_authenticate(fx.server, req, Timestamp{kT0 + 1});
    ASSERT_FALSE(accepted(res));
    EXPECT_EQ(reject_reason(res), RejectReason::kKeyMismatch);
  }
}

TEST(ServerChecks, BadIdFormatRejectedFirst) {
  Fixture fx;
  LoginRequest req = fx.honest_request();
  req.id = "two words";
  const AuthResult res = server_authenticate(fx.server, req, Timestamp{kT0});
  ASSERT_FALSE(accepted(res));
  EXPECT_EQ(reject_reason(res), RejectReason::kBadIdFormat);
}

TEST(ServerChecks, FreshnessWindowIsClosedInterval) {
  Fixture fx;
  const LoginRequest req = fx.honest_request();
  // Exactly at the limit: still fresh.
  EXPECT_TRUE(accepted(
      server_authenticate(fx.server, req, Timestamp{kT0 + 30000})));
  // One past the limit: stale.
  const AuthResult late =
      server_authenticate(fx.server, req, Timestamp{kT0 + 30001});
  ASSERT_FALSE(accepted(late));
  EXPECT_EQ(reject_reason(late), RejectReason::kStaleTimestamp);
  // Future-dated: also stale.
  const AuthResult future =
      server_authenticate(fx.server, req, Timestamp{kT0 - 1});
  ASSERT_FALSE(accepted(future));
  EXPECT_EQ(reject_reason(future), RejectReason::kStaleTimestamp);
  // Zero delay is fine.
  EXPECT_TRUE(accepted(server_authenticate(fx.server, req, Timestamp{kT0})));
}

TEST(ServerChecks, CorruptedMaskedIndexRejected) {
  Fixture fx;
  int bad_index = 0, key_mismatch = 0, accepts = 0;
  for (int i = 0; i < 100; ++i) {
    LoginRequest req = fx.honest_request();
    req.v = random_block(fx.rng);
    const AuthResult res =
        server_authenticate(fx.server, req, Timestamp{kT0 + 1});
    if (accepted(res)) {
      ++accepts;
    } else if (reject_reason(res) == RejectReason::kBadIndex) {
      ++bad_index;
    } else if (reject_reason(res) == RejectReason::kKeyMismatch) {
      ++key_mismatch;
    }
  }
  EXPECT_EQ(accepts, 0);
  EXPECT_EQ(bad_index + key_mismatch, 100);
}

TEST(ServerChecks, RandomHaIsKeyMismatch) {
  Fixture fx;
  for (int i = 0; i < 100; ++i) {
    LoginRequest req = fx.honest_request();
    req.h_a = random_block(fx.rng);
    const AuthResult res =
        server_authenticate(fx.server, req, Timestamp{kT0 + 1});
    ASSERT_FALSE(accepted(res));
    EXPECT_EQ(reject_reason(res), RejectReason::kKeyMismatch);
  }
}

TEST(ServerChecks, ForeignColumnIsMalformed) {
  Fixture fx;
  // Wrong length.
  LoginRequest req = fx.honest_request();
  req.u_col.push_back(1);
  EXPECT_EQ(reject_reason(
                server_authenticate(fx.server, req, Timestamp{kT0 + 1})),
            RejectReason::kMalformed);
  // Right length but not a column of U. Row y of L ends in zeros, so a
  // dot product alone would ignore corruption in those positions; the
  // column-membership check has to catch it.
  for (std::size_t pos = 0; pos < fx.server.n(); ++pos) {
    LoginRequest tampered = fx.honest_request();
    tampered.u_col[pos] = gf::add(tampered.u_col[pos], 1, fx.server.p());
    const AuthResult res =
        server_authenticate(fx.server, tampered, Timestamp{kT0 + 1});
    ASSERT_FALSE(accepted(res)) << "tampered column position " << pos;
    EXPECT_EQ(reject_reason(res), RejectReason::kMalformed);
  }
}

TEST(ServerChecks, SwappedGenuineColumnStillRejected) {
  // A column of U that is genuine but belongs to a different x passes
  // the membership check and must then fail the key comparison.
  Fixture fx;
  LoginRequest req = fx.honest_request();
  const auto& u = fx.server.key_matrix().u;
  std::vector<std::uint64_t> other;
  for (std::size_t j = 1; j <= fx.server.n(); ++j) {
    other = col(u, j);
    if (other != req.u_col) break;
  }
  ASSERT_NE(other, req.u_col);
  req.u_col = other;
  const AuthResult res =
      server_authenticate(fx.server, req, Timestamp{kT0 + 1});
  ASSERT_FALSE(accepted(res));
  EXPECT_EQ(reject_reason(res), RejectReason::kKeyMismatch);
}

TEST(ReplayCache, ExactReplayWithinWindow) {
  Fixture cached(1, 8, /*cache=*/true);
  const LoginRequest req = cached.honest_request();
  EXPECT_TRUE(accepted(
      server_authenticate(cached.server, req, Timestamp{kT0 + 1})));
  const AuthResult replay =
      server_authenticate(cached.server, req, Timestamp{kT0 + 2});
  ASSERT_FALSE(accepted(replay));
  EXPECT_EQ(reject_reason(replay), RejectReason::kReplayDetected);

  // Scheme as written (cache disabled): the same replay is accepted.
  Fixture plain(1, 8, /*cache=*/false);
  const LoginRequest req2 = plain.honest_request();
  EXPECT_TRUE(accepted(
      server_authenticate(plain.server, req2, Timestamp{kT0 + 1})));
  EXPECT_TRUE(accepted(
      server_authenticate(plain.server, req2, Timestamp{kT0 + 2})));
}

TEST(ReplayCache, RejectedRequestsAreNotRecorded) {
  Fixture fx(1, 8, /*cache=*/true);
  const LoginRequest req = fx.honest_request();
  // Stale attempt first: rejected before the cache step.
  EXPECT_EQ(reject_reason(server_authenticate(fx.server, req,
                                              Timestamp{kT0 + 40000})),
            RejectReason::kStaleTimestamp);
  EXPECT_EQ(fx.server.replay_cache()->size(), 0u);
  // The genuine first use still goes through.
  EXPECT_TRUE(
      accepted(server_authenticate(fx.server, req, Timestamp{kT0 + 1})));
  EXPECT_EQ(fx.server.replay_cache()->size(), 1u);
}

TEST(CardVerify, FlippedProofOrStaleResponseRejected) {
  Fixture fx;
  const LoginRequest req = fx.honest_request();
  const AuthResult res =
      server_authenticate(fx.server, req, Timestamp{kT0 + 5});
  ASSERT_TRUE(accepted(res));
  const auto& resp = std::get<ServerResponse>(res);

  for (std::size_t i = 0; i < Block::kSize; ++i) {
    ServerResponse bad = resp;
    bad.m_prime.data()[i] ^= 0x01;
    const VerifyResult v =
        card_verify_server(fx.card, bad, Timestamp{kT0 + 6}, 30000);
    EXPECT_FALSE(v.accepted) << "flipped proof byte " << i;
    EXPECT_EQ(v.reason, RejectReason::kKeyMismatch);
  }

  const VerifyResult stale = card_verify_server(
      fx.card, resp, Timestamp{resp.t_prime.millis + 30001}, 30000);
  EXPECT_FALSE(stale.accepted);
  EXPECT_EQ(stale.reason, RejectReason::kStaleTimestamp);

  const VerifyResult future = card_verify_server(
      fx.card, resp, Timestamp{resp.t_prime.millis - 1}, 30000);
  EXPECT_FALSE(future.accepted);
  EXPECT_EQ(future.reason, RejectReason::kStaleTimestamp);
}

TEST(ServerState, NoPerUserStorage) {
  ServerState server = init_server(seed_of(6), 8, kP, 30000, false);
  const ServerState twin = init_server(seed_of(6), 8, kP, 30000, false);
  ASSERT_EQ(server, twin);

  BlockRng rng = seeded_rng(6);
  for (int i = 0; i < 10; ++i) {
    const std::string id = "user_" + std::to_string(i);
    const SmartCard card =
        register_user(server, id, std::string_view("pw-" + id), rng);
    const LoginRequest req = card_login(card, id, std::string_view("pw-" + id),
                                        Timestamp{kT0 + i}, rng);
    ASSERT_TRUE(accepted(
        server_authenticate(server, req, Timestamp{kT0 + i + 1})));
  }
  EXPECT_EQ(server, twin)
      << "registrations and logins must leave the server state untouched";
}

TEST(InitServer, DeterministicAndValidated) {
  const ServerState a = init_server(seed_of(2), 4, kP, 30000, false);
  const ServerState b = init_server(seed_of(2), 4, kP, 30000, false);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(key_matrix_valid(a.key_matrix()));
  EXPECT_THROW(init_server(seed_of(2), 1, kP, 30000, false),
               std::invalid_argument);
  EXPECT_THROW(init_server(seed_of(2), 4, kP, 0, false),
               std::invalid_argument);
  // phi differs between seeds and is not any obvious hash of public data.
  const ServerState c = init_server(seed_of(3), 4, kP, 30000, false);
  EXPECT_NE(a.phi(), c.phi());
}

TEST(RequestDigest, CoversEveryField) {
  Fixture fx;
  const LoginRequest req = fx.honest_request();
  const Block base = request_digest(req);
  LoginRequest m = req;
  m.id = "alice_02";
  EXPECT_NE(request_digest(m), base);
  m = req; m.h_a.data()[0] ^= 1;
  EXPECT_NE(request_digest(m), base);
  m = req; m.v.data()[5] ^= 1;
  EXPECT_NE(request_digest(m), base);
  m = req; m.u_col[0] ^= 1;
  EXPECT_NE(request_digest(m), base);
  m = req; m.s_a.data()[31] ^= 1;
  EXPECT_NE(request_digest(m), base);
  m = req; m.t.millis += 1;
  EXPECT_NE(request_digest(m), base);
  EXPECT_EQ(request_digest(req), base);
}

}  // namespace
