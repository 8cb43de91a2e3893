#pragma once

// Square matrices over GF(p) and the server's key-matrix machinery:
// deterministic key-pool expansion, symmetric matrix construction,
// Doolittle LU decomposition without pivoting, and pairwise key
// derivation. Row/column indices are 1-based at the public surface.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "luauth/errors.hpp"
#include "luauth/field.hpp"
#include "luauth/sha256.hpp"

namespace luauth {

using Seed = Bytes32;

class FieldMatrix {
 public:
  FieldMatrix(std::size_t n, std::uint64_t p) : n_(n), p_(p), e_(n * n, 0) {
    if (n == 0) throw std::invalid_argument("matrix dimension must be >= 1");
    if (p < 2) throw std::invalid_argument("modulus must be >= 2");
  }

  static FieldMatrix identity(std::size_t n, std::uint64_t p) {
    FieldMatrix m(n, p);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t dim() const noexcept { return n_; }
  std::uint64_t modulus() const noexcept { return p_; }

  // 0-based internal accessors.
  std::uint64_t operator()(std::size_t i, std::size_t j) const {
    return e_[i * n_ + j];
  }
  std::uint64_t& operator()(std::size_t i, std::size_t j) {
    return e_[i * n_ + j];
  }

  std::span<const std::uint64_t> entries() const noexcept { return e_; }

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

 private:
  std::size_t n_;
  std::uint64_t p_;
  std::vector<std::uint64_t> e_;
};

inline FieldMatrix multiply(const FieldMatrix& a, const FieldMatrix& b) {
  if (a.dim() != b.dim() || a.modulus() != b.modulus())
    throw LengthMismatch(a.dim(), b.dim());
  const std::size_t n = a.dim();
  const std::uint64_t p = a.modulus();
  FieldMatrix out(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::uint64_t acc = 0;
      for (std::size_t k = 0; k < n; ++k)
        acc = gf::add(acc, gf::mul(a(i, k), b(k, j), p), p);
      out(i, j) = acc;
    }
  return out;
}

// i is 1-based.
inline std::vector<std::uint64_t> row(const FieldMatrix& m, std::size_t i) {
  if (i < 1 || i > m.dim()) throw IndexOutOfRange(i, m.dim());
  std::vector<std::uint64_t> out(m.dim());
  for (std::size_t j = 0; j < m.dim(); ++j) out[j] = m(i - 1, j);
  return out;
}

// j is 1-based.
inline std::vector<std::uint64_t> col(const FieldMatrix& m, std::size_t j) {
  if (j < 1 || j > m.dim()) throw IndexOutOfRange(j, m.dim());
  std::vector<std::uint64_t> out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) out[i] = m(i, j - 1);
  return out;
}

// True when v equals some column of m (exact residue comparison).
inline bool matches_any_column(const FieldMatrix& m,
                               std::span<const std::uint64_t> v) {
  if (v.size() != m.dim()) return false;
  for (std::size_t j = 0; j < m.dim(); ++j) {
    bool equal = true;
    for (std::size_t i = 0; i < m.dim() && equal; ++i)
      equal = m(i, j) == v[i];
    if (equal) return true;
  }
  return false;
}

inline std::uint64_t dot(std::span<const std::uint64_t> a,
                         std::span<const std::uint64_t> b, std::uint64_t p) {
  if (a.size() != b.size()) throw LengthMismatch(a.size(), b.size());
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc = gf::add(acc, gf::mul(a[i] % p, b[i] % p, p), p);
  return acc;
}

// Doolittle elimination without pivoting: L unit lower triangular, U upper
// triangular, L*U = a (mod p). Pivoting is deliberately absent — row and
// column positions carry protocol meaning, so a permuted factorization
// would be useless. A zero pivot raises SingularError with the 1-based
// pivot index instead.
inline std::pair<FieldMatrix, FieldMatrix> lu_decompose(const FieldMatrix& a) {
  const std::size_t n = a.dim();
  const std::uint64_t p = a.modulus();
  FieldMatrix l = FieldMatrix::identity(n, p);
  FieldMatrix u = a;
  for (std::size_t k = 0; k < n; ++k) {
    if (u(k, k) == 0) throw SingularError(k + 1);
    const std::uint64_t pivot_inv = gf::inv(u(k, k), p);
    for (std::size_t i = k + 1; i < n; ++i) {
      const std::uint64_t factor = gf::mul(u(i, k), pivot_inv, p);
      l(i, k) = factor;
      u(i, k) = 0;
      for (std::size_t j = k + 1; j < n; ++j)
        u(i, j) = gf::sub(u(i, j), gf::mul(factor, u(k, j), p), p);
    }
  }
  return {std::move(l), std::move(u)};
}

// Deterministic pool of `count` pairwise-distinct nonzero residues:
// counter-mode expansion of the seed through the hash, rejecting zero and
// duplicates. Only p - 1 nonzero residues exist, so count above that is
// unsatisfiable.
inline std::vector<std::uint64_t> gen_key_pool(const Seed& seed,
                                               std::size_t count,
                                               std::uint64_t p) {
  if (count > p - 1) throw PoolExhausted(count, p);
  std::vector<std::uint64_t> pool;
  pool.reserve(count);
  std::unordered_set<std::uint64_t> used;
  std::uint64_t counter = 0;
  while (pool.size() < count) {
    std::array<std::uint8_t, 40> msg;
    std::copy(seed.begin(), seed.end(), msg.begin());
    for (int i = 0; i < 8; ++i)
      msg[32 + i] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
    ++counter;
    const Bytes32 d = sha256(msg);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
    v %= p;
    if (v == 0 || !used.insert(v).second) continue;
    pool.push_back(v);
  }
  return pool;
}

// Fills the upper triangle (i <= j) row-major with consecutive pool
// entries and mirrors it down, so the result is symmetric.
inline FieldMatrix build_symmetric_matrix(std::span<const std::uint64_t> pool,
                                          std::size_t n, std::uint64_t p) {
  const std::size_t need = n * (n + 1) / 2;
  if (pool.size() < need) throw InsufficientPool(pool.size(), need);
  FieldMatrix m(n, p);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      m(i, j) = pool[k] % p;
      m(j, i) = m(i, j);
      ++k;
    }
  return m;
}

// The server's master secret: a symmetric matrix with pairwise-distinct
// nonzero upper-triangle entries together with its exact LU factors.
struct KeyMatrix {
  FieldMatrix a;
  FieldMatrix l;
  FieldMatrix u;
  Seed seed{};
  std::uint32_t rejection_count = 0;
};

inline constexpr std::uint32_t kDefaultGenerationAttempts = 1000;

// Rejection sampling: build a candidate matrix from the seeded pool and
// keep it only if the pivot-free LU succeeds (all leading principal
// minors nonzero). Attempt k > 0 re-derives the pool seed as
// sha256(seed || k). Pure function of its arguments.
inline KeyMatrix generate_server_matrices(
    const Seed& seed, std::size_t n, std::uint64_t p,
    std::uint32_t max_attempts = kDefaultGenerationAttempts) {
  if (n < 2) throw std::invalid_argument("matrix dimension must be >= 2");
  for (std::uint32_t attempt = 0; attempt < max_attempts; ++attempt) {
    Seed pool_seed = seed;
    if (attempt > 0) {
      std::array<std::uint8_t, 40> msg;
      std::copy(seed.begin(), seed.end(), msg.begin());
      for (int i = 0; i < 8; ++i)
        msg[32 + i] =
            static_cast<std::uint8_t>(std::uint64_t{attempt} >> (56 - 8 * i));
      pool_seed = sha256(msg);
    }
    const auto pool = gen_key_pool(pool_seed, n * (n + 1) / 2, p);
    FieldMatrix a = build_symmetric_matrix(pool, n, p);
    try {
      auto [l, u] = lu_decompose(a);
      return KeyMatrix{std::move(a), std::move(l), std::move(u), seed,
                       attempt};
    } catch (const SingularError&) {
      // keep sampling
    }
  }
  throw GenerationFailed(max_attempts);
}

// Pairwise key: row x of L dotted with column y of U. By the LU identity
// this equals a[x][y], and by symmetry derive_key(x, y) == derive_key(y, x).
inline std::uint64_t derive_key(const KeyMatrix& km, std::size_t x,
                                std::size_t y) {
  return dot(row(km.l, x), col(km.u, y), km.a.modulus());
}

// All structural invariants at once; store loads and tests lean on this.
inline bool key_matrix_valid(const KeyMatrix& km) {
  const std::size_t n = km.a.dim();
  const std::uint64_t p = km.a.modulus();
  if (km.l.dim() != n || km.u.dim() != n) return false;
  if (km.l.modulus() != p || km.u.modulus() != p) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (km.l(i, i) != 1) return false;
    for (std::size_t j = 0; j < n; ++j) {
      if (km.a(i, j) >= p || km.l(i, j) >= p || km.u(i, j) >= p) return false;
      if (km.a(i, j) != km.a(j, i)) return false;
      if (i < j && km.l(i, j) != 0) return false;
      if (i > j && km.u(i, j) != 0) return false;
    }
  }
  std::unordered_set<std::uint64_t> upper;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (km.a(i, j) == 0) return false;
      if (!upper.insert(km.a(i, j)).second) return false;
    }
  return multiply(km.l, km.u) == km.a;
}

}  // namespace luauth
