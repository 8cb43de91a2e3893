#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace luauth {

// Key-pool generation cannot produce the requested number of distinct
// nonzero residues (count > p - 1).
class PoolExhausted : public std::runtime_error {
 public:
  PoolExhausted(std::size_t count, std::uint64_t p)
      : std::runtime_error("key pool exhausted: need " + std::to_string(count) +
                           " distinct nonzero residues but modulus " +
                           std::to_string(p) + " has only " +
                           std::to_string(p - 1)) {}
};

class InsufficientPool : public std::runtime_error {
 public:
  InsufficientPool(std::size_t have, std::size_t need)
      : std::runtime_error("pool too short: have " + std::to_string(have) +
                           " entries, need " + std::to_string(need)) {}
};

// Elimination hit a zero pivot: the k-th leading principal minor is
// singular. pivot() is 1-based.
class SingularError : public std::runtime_error {
 public:
  explicit SingularError(std::size_t pivot)
      : std::runtime_error("singular leading principal minor at pivot " +
                           std::to_string(pivot)),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class GenerationFailed : public std::runtime_error {
 public:
  explicit GenerationFailed(std::uint32_t attempts)
      : std::runtime_error("matrix generation failed after " +
                           std::to_string(attempts) + " attempts") {}
};

class IndexOutOfRange : public std::out_of_range {
 public:
  IndexOutOfRange(std::size_t index, std::size_t n)
      : std::out_of_range("index " + std::to_string(index) +
                          " outside [1, " + std::to_string(n) + "]") {}
};

class LengthMismatch : public std::invalid_argument {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : std::invalid_argument("length mismatch: " + std::to_string(a) +
                              " vs " + std::to_string(b)) {}
};

class BadIdFormat : public std::invalid_argument {
 public:
  explicit BadIdFormat(const std::string& id)
      : std::invalid_argument("identity does not match the allowed format: \"" +
                              id + "\"") {}
};

class BadPassword : public std::invalid_argument {
 public:
  explicit BadPassword(std::size_t size)
      : std::invalid_argument("password must be 1..256 bytes, got " +
                              std::to_string(size)) {}
};

class IdMismatch : public std::invalid_argument {
 public:
  IdMismatch(const std::string& entered, const std::string& card)
      : std::invalid_argument("keyed-in identity \"" + entered +
                              "\" does not match card identity \"" + card +
                              "\"") {}
};

}  // namespace luauth
