// Operator command line for the LU-decomposition authentication scheme:
//   init      create a server state file from a seed
//   register  issue a smart-card file for a user
//   login     run one full handshake between a card and a server
//   attack    run the adversary suite against honest artifacts
//   inspect   print file metadata (secrets only on request)
//
// Exit codes, uniform across subcommands:
//   0  success / both sides accepted / suite met expectations
//   1  protocol rejection or verification failure (including corrupt files)
//   2  usage or I/O error
//
// Passwords are read from an environment variable (--password-env, default
// LUAUTH_PASSWORD) or prompted on the terminal — never from argv.

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <termios.h>

#include "CLI11.hpp"
#include "luauth/luauth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitUsage = 2;

// Built-in default RNG seed so demo and attack runs are reproducible
// without flags; pass --seed to change it.
constexpr char kDefaultRngSeedHex[] =
    "6c75617574682e636c692e64656661756c742e726e672e736565642e76312e00";

std::uint64_t wall_clock_millis() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
}

std::optional<luauth::Bytes32> parse_seed_hex(const std::string& hex) {
  const auto b = luauth::block_from_hex(hex);
  if (!b) return std::nullopt;
  return b->bytes();
}

// Environment variable first; otherwise prompt on the controlling
// terminal with echo disabled, or read one line when stdin is a pipe.
std::string read_password(const std::string& env_name) {
  if (const char* v = std::getenv(env_name.c_str())) return v;
  std::string pw;
  if (isatty(STDIN_FILENO)) {
    std::cerr << "Password: " << std::flush;
    termios old_attr{};
    tcgetattr(STDIN_FILENO, &old_attr);
    termios no_echo = old_attr;
    no_echo.c_lflag &= ~static_cast<tcflag_t>(ECHO);
    tcsetattr(STDIN_FILENO, TCSANOW, &no_echo);
    std::getline(std::cin, pw);
    tcsetattr(STDIN_FILENO, TCSANOW, &old_attr);
    std::cerr << "\n";
  } else {
    std::getline(std::cin, pw);
  }
  return pw;
}

void emit(bool machine, const std::string& key, const std::string& value,
          const std::string& human_prefix = "") {
  if (machine)
    std::cout << key << '=' << value << '\n';
  else
    std::cout << (human_prefix.empty() ? key : human_prefix) << ": " << value
              << '\n';
}

std::string verdict_string(bool accepted,
                           std::optional<luauth::RejectReason> reason) {
  if (accepted) return "accept";
  return reason ? std::string("reject (") + to_string(*reason) + ")"
                : "reject";
}

// ---------------------------------------------------------------- init

int cmd_init(const luauth::Seed& seed, std::size_t n, std::uint64_t p,
             std::uint64_t delta_t_ms, bool replay_cache,
             const std::string& out_path, bool machine) {
  const luauth::ServerState state =
      luauth::init_server(seed, n, p, delta_t_ms, replay_cache);
  luauth::store::save_server(state, out_path);
  if (machine) {
    emit(true, "n", std::to_string(state.n()));
    emit(true, "p", std::to_string(state.p()));
    emit(true, "delta_t_ms", std::to_string(state.delta_t_ms()));
    emit(true, "replay_cache", state.replay_cache_enabled() ? "1" : "0");
    emit(true, "rejection_count",
         std::to_string(state.key_matrix().rejection_count));
    emit(true, "server_file", out_path);
  } else {
    std::cout << "initialized server: n=" << state.n() << ", p=" << state.p()
              << ", delta_t_ms=" << state.delta_t_ms()
              << ", rejection_count=" << state.key_matrix().rejection_count
              << "\nwritten to " << out_path << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------ register

int cmd_register(const std::string& server_file, const std::string& id,
                 const std::string& password, const std::string& card_out,
                 const luauth::Bytes32& rng_seed, bool machine) {
  const luauth::ServerState server = luauth::store::load_server(server_file);
  luauth::BlockRng rng(rng_seed);
  const luauth::SmartCard card =
      luauth::register_user(server, id, std::string_view(password), rng);
  luauth::store::save_card(card, card_out);
  if (machine) {
    emit(true, "id", card.id);
    emit(true, "n", std::to_string(card.n));
    emit(true, "card_file", card_out);
  } else {
    std::cout << "registered '" << card.id << "'; card written to "
              << card_out << '\n';
  }
  return kExitOk;
}

// --------------------------------------------------------------- login

int cmd_login(const std::string& server_file, const std::string& card_file,
              const std::string& password, std::uint64_t at_millis,
              std::uint64_t delay_ms, const luauth::Bytes32& rng_seed,
              bool machine) {
  const luauth::ServerState server = luauth::store::load_server(server_file);
  const luauth::SmartCard card = luauth::store::load_card(card_file);
  luauth::BlockRng rng(rng_seed);
  luauth::sim::SimClock clock(at_millis);
  luauth::sim::Channel channel;
  channel.delay_ms = delay_ms;
  const luauth::sim::Transcript tr =
      luauth::sim::run_handshake(server, card, password, channel, clock, rng);

  const bool server_ok = tr.server_result && accepted(*tr.server_result);
  const bool card_ok = tr.card_result && tr.card_result->accepted;
  if (machine) {
    emit(true, "id", tr.request.id);
    emit(true, "t_request_sent", std::to_string(tr.t_request_sent.millis));
    emit(true, "request_frame", luauth::to_hex(tr.request_frame));
    emit(true, "t_request_received",
         std::to_string(tr.t_request_received.millis));
    emit(true, "server_verdict", server_ok ? "accept" : "reject");
    if (!server_ok && tr.server_result)
      emit(true, "server_reason", to_string(reject_reason(*tr.server_result)));
    if (server_ok) {
      const auto& resp = std::get<luauth::ServerResponse>(*tr.server_result);
      emit(true, "m_prime", luauth::to_hex(resp.m_prime));
      emit(true, "t_prime", std::to_string(resp.t_prime.millis));
      if (tr.server_r_prime)
        emit(true, "server_r_prime", luauth::to_hex(*tr.server_r_prime));
    }
    emit(true, "response_frame", luauth::to_hex(tr.response_frame));
    emit(true, "t_response_received",
         std::to_string(tr.t_response_received.millis));
    emit(true, "card_verdict", card_ok ? "accept" : "reject");
    if (!card_ok && tr.card_result && tr.card_result->reason)
      emit(true, "card_reason", to_string(*tr.card_result->reason));
    emit(true, "card_r", luauth::to_hex(tr.card_r));
    emit(true, "result", (server_ok && card_ok) ? "accept" : "reject");
  } else {
    std::cout << "server: "
              << verdict_string(server_ok,
                                !server_ok && tr.server_result
                                    ? std::optional(reject_reason(
                                          *tr.server_result))
                                    : std::nullopt)
              << '\n';
    std::cout << "card:   "
              << verdict_string(card_ok, tr.card_result
                                             ? tr.card_result->reason
                                             : std::nullopt)
              << '\n';
    std::cout << "result: " << ((server_ok && card_ok) ? "accept" : "reject")
              << '\n';
  }
  return (server_ok && card_ok) ? kExitOk : kExitRejected;
}

// -------------------------------------------------------------- attack

struct AttackRow {
  std::string name;
  std::size_t trials = 0;
  std::size_t accepts = 0;
  std::size_t expected = 0;
  std::string note;
  bool ok() const { return accepts == expected; }
};

// Field extents inside an encoded login-request frame (header is
// magic 4 + version 1 + type 1 + length 4 = 10 bytes).
struct FrameOffsets {
  std::size_t id, id_len, h_a, v, u_col, u_col_len, s_a;
};

FrameOffsets frame_offsets(const luauth::LoginRequest& req) {
  FrameOffsets o{};
  o.id = 10 + 2;
  o.id_len = req.id.size();
  o.h_a = o.id + o.id_len;
  o.v = o.h_a + 32;
  o.u_col = o.v + 32 + 2;
  o.u_col_len = 8 * req.u_col.size();
  o.s_a = o.u_col + o.u_col_len;
  return o;
}

// One trial: flip one random byte inside [off, off+len) of the honest
// frame, then run the frame through decode + authenticate. Returns true
// if the server accepted.
bool tamper_trial(const std::vector<std::uint8_t>& honest_frame,
                  std::size_t off, std::size_t len,
                  const luauth::ServerState& server, luauth::Timestamp now,
                  luauth::BlockRng& rng) {
  std::vector<std::uint8_t> frame = honest_frame;
  const std::size_t pos = off + (rng.uniform_index(len) - 1);
  const auto mask = static_cast<std::uint8_t>(rng.uniform_index(255));
  frame[pos] ^= mask;
  const auto req = luauth::wire::decode_login_request(frame, server.p());
  if (!req) return false;
  return accepted(luauth::server_authenticate(server, *req, now));
}

// Registers `count` cards whose pairwise keys are all distinct, so a
// response for one session can never legitimately verify on another
// card. Distinctness is achievable whenever count <= n(n+1)/2.
std::vector<luauth::SmartCard> register_distinct_cards(
    const luauth::ServerState& server, std::size_t count,
    luauth::BlockRng& rng) {
  std::vector<luauth::SmartCard> cards;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string id = "session_user_" + std::to_string(i);
    const std::string pw = "session_pw_" + std::to_string(i);
    for (int tries = 0; tries < 1000; ++tries) {
      luauth::SmartCard card =
          luauth::register_user(server, id, std::string_view(pw), rng);
      const bool clash =
          std::any_of(cards.begin(), cards.end(), [&](const auto& c) {
            return c.k_block == card.k_block;
          });
      if (!clash) {
        cards.push_back(std::move(card));
        break;
      }
    }
    if (cards.size() != i + 1)
      throw std::runtime_error(
          "could not draw distinct pairwise keys for parallel sessions");
  }
  return cards;
}

int cmd_attack(const std::string& server_file, const std::string& card_file,
               const std::string& password, const std::string& suite,
               std::size_t trials, std::uint64_t at_millis,
               const luauth::Bytes32& rng_seed, bool machine) {
  const luauth::ServerState server = luauth::store::load_server(server_file);
  const luauth::SmartCard card = luauth::store::load_card(card_file);
  luauth::BlockRng rng(rng_seed);

  // Honest baseline transcript every attack starts from.
  luauth::sim::SimClock clock(at_millis);
  luauth::sim::Channel channel;
  const luauth::sim::Transcript tr =
      luauth::sim::run_handshake(server, card, password, channel, clock, rng);
  if (!tr.both_accepted()) {
    std::cerr << "attack: honest baseline handshake was rejected; "
                 "check the password and artifacts\n";
    return kExitRejected;
  }
  const luauth::Timestamp t0 = tr.request.t;
  const bool cache_on = server.replay_cache_enabled();

  const bool want_replay = suite == "all" || suite == "replay";
  const bool want_forge = suite == "all" || suite == "forge";
  const bool want_tamper = suite == "all" || suite == "tamper";
  const bool want_parallel = suite == "all" || suite == "parallel";
  std::vector<AttackRow> rows;

  if (want_replay) {
    // Identical frame, one millisecond later: inside the window the
    // scheme as written accepts; the optional cache turns that into a
    // rejection.
    AttackRow within{"replay_within_window", 1, 0, cache_on ? 0u : 1u,
                     cache_on ? "cache rejects" : "scheme as written"};
    if (accepted(luauth::sim::attack_replay(
            tr, server, luauth::Timestamp{t0.millis + 1})))
      within.accepts = 1;
    rows.push_back(within);

    AttackRow after{"replay_after_window", 1, 0, 0, "stale by 1 ms"};
    if (accepted(luauth::sim::attack_replay(
            tr, server,
            luauth::Timestamp{t0.millis + server.delta_t_ms() + 1})))
      after.accepts = 1;
    rows.push_back(after);
  }

  if (want_forge) {
    const luauth::sim::Knowledge know = luauth::sim::attack_eavesdrop(tr);
    AttackRow forged{"forge_eavesdropped", trials, 0, 0,
                     "random h_a/s_a, observed v/u_col"};
    forged.accepts = luauth::sim::attack_forge(
        know, know.id, server, luauth::Timestamp{t0.millis + 5}, rng, trials);
    rows.push_back(forged);

    AttackRow corrupt{"forge_corrupt_ucol", trials, 0, 0,
                      "honest fields, one corrupted column entry"};
    for (std::size_t i = 0; i < trials; ++i) {
      luauth::LoginRequest req = tr.request;
      req.t = luauth::Timestamp{t0.millis + 5};
      const std::size_t idx = rng.uniform_index(req.u_col.size()) - 1;
      std::uint64_t fresh = rng.next_u64() % server.p();
      if (fresh == req.u_col[idx]) fresh = (fresh + 1) % server.p();
      req.u_col[idx] = fresh;
      if (accepted(luauth::server_authenticate(server, req,
                                               luauth::Timestamp{
                                                   t0.millis + 5})))
        ++corrupt.accepts;
    }
    rows.push_back(corrupt);
  }

  if (want_tamper) {
    const FrameOffsets off = frame_offsets(tr.request);
    const luauth::Timestamp now{t0.millis + 10};
    const struct {
      const char* name;
      std::size_t off, len;
    } fields[] = {
        {"tamper_id", off.id, off.id_len},
        {"tamper_h_a", off.h_a, 32},
        {"tamper_v", off.v, 32},
        {"tamper_u_col", off.u_col, off.u_col_len},
        {"tamper_s_a", off.s_a, 32},
    };
    for (const auto& f : fields) {
      AttackRow row{f.name, trials, 0, 0, "single flipped byte in flight"};
      for (std::size_t i = 0; i < trials; ++i)
        if (tamper_trial(tr.request_frame, f.off, f.len, server, now, rng))
          ++row.accepts;
      rows.push_back(row);
    }
  }

  if (want_parallel) {
    const std::size_t max_distinct = server.n() * (server.n() + 1) / 2;
    const std::size_t sessions = std::min<std::size_t>(8, max_distinct);
    const auto cards = register_distinct_cards(server, sessions, rng);

    // Interleave: every request is sent before any response is checked.
    std::vector<luauth::LoginRequest> reqs;
    std::vector<luauth::ServerResponse> resps;
    bool honest_ok = true;
    for (std::size_t i = 0; i < sessions; ++i) {
      const std::string pw = "session_pw_" + std::to_string(i);
      reqs.push_back(luauth::card_login(cards[i], cards[i].id,
                                        std::string_view(pw),
                                        luauth::Timestamp{t0.millis + i},
                                        rng));
    }
    for (std::size_t i = 0; i < sessions; ++i) {
      const auto res = luauth::server_authenticate(
          server, reqs[i], luauth::Timestamp{t0.millis + i + 2});
      if (!accepted(res)) {
        honest_ok = false;
        break;
      }
      resps.push_back(std::get<luauth::ServerResponse>(res));
    }
    AttackRow row{"parallel_session", 0, 0, 0, ""};
    if (!honest_ok) {
      row.trials = sessions;
      row.accepts = 0;
      row.expected = sessions;  // forces a failed row
      row.note = "honest interleaved sessions did not all accept";
    } else {
      std::size_t injections = 0;
      std::size_t accepts = 0;
      for (std::size_t i = 0; i < sessions; ++i) {
        // Own response is the sanity baseline, checked silently.
        if (!luauth::card_verify_server(cards[i], resps[i],
                                        luauth::Timestamp{t0.millis + i + 4},
                                        server.delta_t_ms())
                 .accepted)
          honest_ok = false;
        for (std::size_t j = 0; j < sessions; ++j) {
          if (i == j) continue;
          ++injections;  // response of session i delivered to card j
          if (luauth::card_verify_server(cards[j], resps[i],
                                         luauth::Timestamp{t0.millis + i + 4},
                                         server.delta_t_ms())
                  .accepted)
            ++accepts;
        }
        // Reflections: a request frame replayed to a card as if it were
        // a response, and a response frame replayed to the server as if
        // it were a request.
        ++injections;
        if (luauth::wire::decode_server_response(
                luauth::wire::encode_login_request(reqs[i])))
          ++accepts;
        ++injections;
        if (luauth::wire::decode_login_request(
                luauth::wire::encode_server_response(resps[i]), server.p()))
          ++accepts;
      }
      row.trials = injections;
      row.accepts = accepts;
      row.expected = honest_ok ? 0 : injections + 1;  // fail if honest broke
      row.note = std::to_string(sessions) +
                 " interleaved sessions; cross + reflected injections";
    }
    rows.push_back(row);
  }

  bool all_ok = true;
  for (const auto& row : rows) all_ok = all_ok && row.ok();

  if (machine) {
    for (const auto& row : rows) {
      std::cout << row.name << ".trials=" << row.trials << '\n'
                << row.name << ".accepts=" << row.accepts << '\n'
                << row.name << ".expected=" << row.expected << '\n'
                << row.name << ".ok=" << (row.ok() ? 1 : 0) << '\n';
    }
    std::cout << "suite_ok=" << (all_ok ? 1 : 0) << '\n';
  } else {
    std::printf("%-22s %8s %8s %9s  %-6s %s\n", "attack", "trials", "accepts",
                "expected", "result", "note");
    for (const auto& row : rows)
      std::printf("%-22s %8zu %8zu %9zu  %-6s %s\n", row.name.c_str(),
                  row.trials, row.accepts, row.expected,
                  row.ok() ? "ok" : "FAIL", row.note.c_str());
    std::printf("suite: %s\n", all_ok ? "PASS" : "FAIL");
  }
  return all_ok ? kExitOk : kExitRejected;
}

// ------------------------------------------------------------- inspect

int cmd_inspect(const std::string& path, bool reveal_secrets, bool machine) {
  const std::vector<std::uint8_t> data = luauth::store::read_file(path);
  if (data.size() >= 4 &&
      std::memcmp(data.data(), luauth::store::kServerMagic, 4) == 0) {
    const luauth::ServerState s = luauth::store::load_server_bytes(data);
    emit(machine, "type", "server");
    emit(machine, "n", std::to_string(s.n()));
    emit(machine, "p", std::to_string(s.p()));
    emit(machine, "delta_t_ms", std::to_string(s.delta_t_ms()));
    emit(machine, "replay_cache", s.replay_cache_enabled() ? "1" : "0");
    if (reveal_secrets) {
      emit(machine, "phi", luauth::to_hex(s.phi()));
      emit(machine, "seed", luauth::to_hex(s.seed()));
      auto join = [](std::span<const std::uint64_t> es) {
        std::string out;
        for (std::size_t i = 0; i < es.size(); ++i) {
          if (i) out += ',';
          out += std::to_string(es[i]);
        }
        return out;
      };
      emit(machine, "l", join(s.key_matrix().l.entries()));
      emit(machine, "u", join(s.key_matrix().u.entries()));
    }
    return kExitOk;
  }
  if (data.size() >= 4 &&
      std::memcmp(data.data(), luauth::store::kCardMagic, 4) == 0) {
    const luauth::SmartCard c = luauth::store::load_card_bytes(data);
    emit(machine, "type", "card");
    emit(machine, "id", c.id);
    emit(machine, "n", std::to_string(c.n));
    emit(machine, "p", std::to_string(c.p));
    emit(machine, "hash_alg", "standard-256");
    if (reveal_secrets) {
      emit(machine, "k_block", luauth::to_hex(c.k_block));
      emit(machine, "v", luauth::to_hex(c.v));
      emit(machine, "theta", luauth::to_hex(c.theta));
      std::string col;
      for (std::size_t i = 0; i < c.u_col.size(); ++i) {
        if (i) col += ',';
        col += std::to_string(c.u_col[i]);
      }
      emit(machine, "u_col", col);
    }
    return kExitOk;
  }
  throw luauth::store::StoreError(luauth::store::StoreError::Kind::kBadMagic,
                                  "unknown file type (bad magic)");
}

// Maps thrown errors onto the uniform exit-code contract.
template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const luauth::store::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const luauth::store::StoreError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRejected;
  } catch (const luauth::BadIdFormat& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRejected;
  } catch (const luauth::BadPassword& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRejected;
  } catch (const luauth::IdMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRejected;
  } catch (const luauth::GenerationFailed& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRejected;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bilateral smart-card authentication over an LU-factored key matrix"};
  app.require_subcommand(1);

  const std::uint64_t default_p = luauth::gf::kDefaultModulus;

  // init
  auto* init = app.add_subcommand("init", "Create a server state file");
  std::string init_seed_hex;
  std::size_t init_n = 8;
  std::uint64_t init_p = default_p;
  std::uint64_t init_delta = luauth::kDefaultFreshnessWindowMs;
  bool init_cache = false;
  std::string init_out;
  bool init_machine = false;
  init->add_option("--seed", init_seed_hex,
                   "Server master seed, 64 hex characters")
      ->required();
  init->add_option("--n", init_n, "Matrix dimension (users x users)")
      ->check(CLI::Range(std::size_t(2), std::size_t(65535)));
  init->add_option("--p", init_p, "Prime modulus")
      ->check(CLI::Range(std::uint64_t(2), std::uint64_t(UINT64_MAX)));
  init->add_option("--delta-ms", init_delta, "Freshness window in ms")
      ->check(CLI::Range(std::uint64_t(1), std::uint64_t(UINT64_MAX)));
  init->add_flag("--replay-cache", init_cache,
                 "Enable exact-replay rejection within the window");
  init->add_option("--out", init_out, "Output server file path")->required();
  init->add_flag("--machine", init_machine, "key=value output");

  // register
  auto* reg = app.add_subcommand("register", "Issue a smart-card file");
  std::string reg_server, reg_id, reg_card_out, reg_pw_env = "LUAUTH_PASSWORD";
  std::string reg_seed_hex = kDefaultRngSeedHex;
  bool reg_machine = false;
  reg->add_option("--server", reg_server, "Server state file")->required();
  reg->add_option("--id", reg_id, "User identity")->required();
  reg->add_option("--card-out", reg_card_out, "Output card file path")
      ->required();
  reg->add_option("--password-env", reg_pw_env,
                  "Environment variable holding the password");
  reg->add_option("--seed", reg_seed_hex,
                  "Registration RNG seed, 64 hex characters");
  reg->add_flag("--machine", reg_machine, "key=value output");

  // login
  auto* login = app.add_subcommand("login", "Run one full handshake");
  std::string login_server, login_card, login_pw_env = "LUAUTH_PASSWORD";
  std::string login_seed_hex = kDefaultRngSeedHex;
  std::uint64_t login_at = 0, login_delay = 0;
  bool login_machine = false;
  bool login_at_set = false;
  login->add_option("--server", login_server, "Server state file")->required();
  login->add_option("--card", login_card, "Card file")->required();
  login->add_option("--password-env", login_pw_env,
                    "Environment variable holding the password");
  auto* at_opt = login->add_option("--at-millis", login_at,
                                   "Pin the clock (ms since epoch)");
  login->add_option("--delay-ms", login_delay, "Channel delay per direction");
  login->add_option("--seed", login_seed_hex,
                    "Login RNG seed, 64 hex characters");
  login->add_flag("--machine", login_machine, "key=value output");

  // attack
  auto* attack = app.add_subcommand("attack", "Run the adversary suite");
  std::string atk_server, atk_card, atk_pw_env = "LUAUTH_PASSWORD";
  std::string atk_seed_hex = kDefaultRngSeedHex;
  std::string atk_suite = "all";
  std::size_t atk_trials = 100;
  std::uint64_t atk_at = 0;
  bool atk_machine = false;
  attack->add_option("--server", atk_server, "Server state file")->required();
  attack->add_option("--card", atk_card, "Card file")->required();
  attack->add_option("--password-env", atk_pw_env,
                     "Environment variable holding the password");
  attack->add_option("--suite", atk_suite, "all | replay | forge | tamper | parallel")
      ->check(CLI::IsMember({"all", "replay", "forge", "tamper", "parallel"}));
  attack->add_option("--trials", atk_trials, "Trials per sampled attack")
      ->check(CLI::Range(std::size_t(1), std::size_t(1000000)));
  auto* atk_at_opt = attack->add_option("--at-millis", atk_at,
                                        "Pin the clock (ms since epoch)");
  attack->add_option("--seed", atk_seed_hex,
                     "Attack RNG seed, 64 hex characters");
  attack->add_flag("--machine", atk_machine, "key=value output");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print file metadata");
  std::string ins_path;
  bool ins_reveal = false, ins_machine = false;
  inspect->add_option("file", ins_path, "Server or card file")->required();
  inspect->add_flag("--reveal-secrets", ins_reveal,
                    "Also print key material");
  inspect->add_flag("--machine", ins_machine, "key=value output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  login_at_set = at_opt->count() > 0;
  const bool atk_at_set = atk_at_opt->count() > 0;

  if (init->parsed()) {
    const auto seed = parse_seed_hex(init_seed_hex);
    if (!seed) {
      std::cerr << "error: --seed must be exactly 64 hex characters\n";
      return kExitUsage;
    }
    return guarded([&] {
      return cmd_init(*seed, init_n, init_p, init_delta, init_cache, init_out,
                      init_machine);
    });
  }
  if (reg->parsed()) {
    const auto seed = parse_seed_hex(reg_seed_hex);
    if (!seed) {
      std::cerr << "error: --seed must be exactly 64 hex characters\n";
      return kExitUsage;
    }
    const std::string pw = read_password(reg_pw_env);
    return guarded([&] {
      return cmd_register(reg_server, reg_id, pw, reg_card_out, *seed,
                          reg_machine);
    });
  }
  if (login->parsed()) {
    const auto seed = parse_seed_hex(login_seed_hex);
    if (!seed) {
      std::cerr << "error: --seed must be exactly 64 hex characters\n";
      return kExitUsage;
    }
    const std::string pw = read_password(login_pw_env);
    const std::uint64_t at = login_at_set ? login_at : wall_clock_millis();
    return guarded([&] {
      return cmd_login(login_server, login_card, pw, at, login_delay, *seed,
                       login_machine);
    });
  }
  if (attack->parsed()) {
    const auto seed = parse_seed_hex(atk_seed_hex);
    if (!seed) {
      std::cerr << "error: --seed must be exactly 64 hex characters\n";
      return kExitUsage;
    }
    const std::string pw = read_password(atk_pw_env);
    const std::uint64_t at = atk_at_set ? atk_at : wall_clock_millis();
    return guarded([&] {
      return cmd_attack(atk_server, atk_card, pw, atk_suite, atk_trials, at,
                        *seed, atk_machine);
    });
  }
  if (inspect->parsed()) {
    return guarded(
        [&] { return cmd_inspect(ins_path, ins_reveal, ins_machine); });
  }
  return kExitUsage;
}
