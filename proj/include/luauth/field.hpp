#pragma once

// Scalar arithmetic over GF(p). Residues are plain uint64_t kept in
// [0, p); every operation reduces. p must be an odd prime below 2^63 so
// sums fit in 64 bits and products in 128.

#include <cstdint>
#include <stdexcept>

namespace luauth::gf {

// 2^61 - 1, a Mersenne prime. Exact arithmetic inside 64-bit words.
inline constexpr std::uint64_t kDefaultModulus = (std::uint64_t{1} << 61) - 1;

inline std::uint64_t reduce(std::uint64_t v, std::uint64_t p) { return v % p; }

inline std::uint64_t add(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  const std::uint64_t s = a + b;
  return s >= p ? s - p : s;
}

inline std::uint64_t sub(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return a >= b ? a - b : a + (p - b);
}

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(
      static_cast<unsigned __int128>(a) * b % p);
}

inline std::uint64_t neg(std::uint64_t a, std::uint64_t p) {
  return a == 0 ? 0 : p - a;
}

// Multiplicative inverse via the extended Euclidean algorithm.
// Zero is not invertible; that is a hard error, never a value.
inline std::uint64_t inv(std::uint64_t a, std::uint64_t p) {
  if (a == 0) throw std::domain_error("gf: zero has no multiplicative inverse");
  __int128 t = 0, new_t = 1;
  __int128 r = p, new_r = a;
  while (new_r != 0) {
    const __int128 q = r / new_r;
    t -= q * new_t;
    std::swap(t, new_t);
    r -= q * new_r;
    std::swap(r, new_r);
  }
  if (r != 1) throw std::domain_error("gf: element not invertible (p not prime?)");
  if (t < 0) t += p;
  return static_cast<std::uint64_t>(t);
}

}  // namespace luauth::gf
