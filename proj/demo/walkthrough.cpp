// Library walkthrough: sets up a server, issues a card, then shows an
// honest handshake, a wrong password, a stale replay, and a forgery
// attempt — printing what each party sees at every step.

#include <cstdio>
#include <string_view>

#include "luauth/luauth.hpp"

using namespace luauth;

namespace {

void show(const char* label, bool ok, const char* detail) {
  std::printf("  %-34s %s%s%s\n", label, ok ? "accept" : "reject",
              detail[0] ? " — " : "", detail);
}

}  // namespace

int main() {
  // Server setup: one 32-byte seed determines the whole key matrix.
  Seed seed{};
  seed[0] = 0x5e;
  seed[1] = 0xed;
  const ServerState server = init_server(seed, /*n=*/8, gf::kDefaultModulus);
  std::printf("server: n=%zu, p=%llu, matrix regenerations=%u\n", server.n(),
              static_cast<unsigned long long>(server.p()),
              server.key_matrix().rejection_count);

  // Registration (secure channel): the user gets a card, the server
  // keeps nothing about them.
  Block rng_seed;
  rng_seed.data()[0] = 1;
  BlockRng rng(rng_seed);
  const SmartCard card =
      register_user(server, "alice", std::string_view("correct horse"), rng);
  std::printf("issued card for '%s' (column of %zu field elements)\n",
              card.id.c_str(), card.u_col.size());

  // Honest login over a clean channel.
  sim::SimClock clock(1'700'000'000'000);
  sim::Channel clean;
  std::printf("\nhonest handshake:\n");
  const auto honest =
      sim::run_handshake(server, card, "correct horse", clean, clock, rng);
  show("server verdict", accepted(*honest.server_result), "");
  show("card verdict", honest.card_result->accepted, "");
  std::printf("  nonce agreement: %s\n",
              honest.server_r_prime && *honest.server_r_prime == honest.card_r
                  ? "server recovered the card's exact r"
                  : "MISMATCH");

  // Wrong password: the card builds the request anyway; the server is
  // the one that notices.
  std::printf("\nwrong password:\n");
  const auto wrong =
      sim::run_handshake(server, card, "wrong horse", clean, clock, rng);
  show("server verdict", accepted(*wrong.server_result),
       to_string(reject_reason(*wrong.server_result)));

  // Replaying the honest frame after the freshness window.
  std::printf("\nreplay after the window:\n");
  const auto replayed = sim::attack_replay(
      honest, server,
      Timestamp{honest.request.t.millis + server.delta_t_ms() + 1});
  show("server verdict", accepted(replayed),
       to_string(reject_reason(replayed)));

  // Forging from everything an eavesdropper saw: 200 attempts.
  std::printf("\nforgery from eavesdropped values:\n");
  const auto knowledge = sim::attack_eavesdrop(honest);
  const std::size_t accepts =
      sim::attack_forge(knowledge, knowledge.id, server,
                        Timestamp{honest.request.t.millis + 3}, rng, 200);
  std::printf("  %zu of 200 forged requests accepted\n", accepts);

  return 0;
}
