// Key-matrix machinery: pool generation, symmetric fill, pivot-free LU,
// extraction, and the pairwise-key identity that the protocol rests on.

#include "luauth/matrix.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <numeric>
#include <unordered_set>

using namespace luauth;

namespace {

constexpr std::uint64_t kP = gf::kDefaultModulus;

Seed seed_of(std::uint8_t tag) {
  Seed s{};
  s[0] = tag;
  return s;
}

// The worked 2x2 example over GF(7) used throughout the test corpus.
FieldMatrix worked_a() {
  FieldMatrix a(2, 7);
  a(0, 0) = 2; a(0, 1) = 3;
  a(1, 0) = 3; a(1, 1) = 5;
  return a;
}

TEST(KeyPool, DistinctNonzeroInRange) {
  const auto pool = gen_key_pool(seed_of(1), 3, 7);
  ASSERT_EQ(pool.size(), 3u);
  std::unordered_set<std::uint64_t> seen;
  for (const auto v : pool) {
    EXPECT_GE(v, 1u);
    EXPECT_LT(v, 7u);
    EXPECT_TRUE(seen.insert(v).second) << "duplicate pool entry " << v;
  }
}

TEST(KeyPool, CountZeroYieldsEmptyPool) {
  EXPECT_TRUE(gen_key_pool(seed_of(1), 0, 7).empty());
}

TEST(KeyPool, MoreThanNonzeroResiduesIsExhausted) {
  EXPECT_THROW(gen_key_pool(seed_of(1), 7, 7), PoolExhausted);
}

TEST(KeyPool, DeterministicForFixedSeed) {
  EXPECT_EQ(gen_key_pool(seed_of(9), 32, kP), gen_key_pool(seed_of(9), 32, kP));
  EXPECT_NE(gen_key_pool(seed_of(9), 4, kP), gen_key_pool(seed_of(8), 4, kP));
}

TEST(SymmetricMatrix, FillAndMirror) {
  const std::uint64_t pool[] = {2, 3, 5};
  const FieldMatrix m = build_symmetric_matrix(pool, 2, 7);
  EXPECT_EQ(m, worked_a());
}

TEST(SymmetricMatrix, OneByOne) {
  const std::uint64_t pool[] = {9};
  const FieldMatrix m = build_symmetric_matrix(pool, 1, 11);
  EXPECT_EQ(m(0, 0), 9u);
}

TEST(SymmetricMatrix, ShortPoolRejected) {
  const std::uint64_t pool[] = {2, 3};
  EXPECT_THROW(build_symmetric_matrix(pool, 2, 7), InsufficientPool);
}

TEST(Lu, WorkedExampleOverGf7) {
  const auto [l, u] = lu_decompose(worked_a());
  EXPECT_EQ(l(0, 0), 1u);
  EXPECT_EQ(l(0, 1), 0u);
  EXPECT_EQ(l(1, 0), 5u);  // 3 * inv(2) = 3 * 4 = 12 = 5 (mod 7)
  EXPECT_EQ(l(1, 1), 1u);
  EXPECT_EQ(u(0, 0), 2u);
  EXPECT_EQ(u(0, 1), 3u);
  EXPECT_EQ(u(1, 0), 0u);
  EXPECT_EQ(u(1, 1), 4u);  // 5 - 5*3 = -10 = 4 (mod 7)
  EXPECT_EQ(multiply(l, u), worked_a());
}

TEST(Lu, IdentityDecomposesToItself) {
  for (const std::size_t n : {1u, 3u, 8u}) {
    const FieldMatrix i = FieldMatrix::identity(n, kP);
    const auto [l, u] = lu_decompose(i);
    EXPECT_EQ(l, i);
    EXPECT_EQ(u, i);
  }
}

TEST(Lu, ZeroLeadingPivotIsSingular) {
  FieldMatrix a(2, 7);
  a(0, 0) = 0; a(0, 1) = 1;
  a(1, 0) = 1; a(1, 1) = 2;
  try {
    lu_decompose(a);
    FAIL() << "expected SingularError";
  } catch (const SingularError& e) {
    EXPECT_EQ(e.pivot(), 1u);
  }
}

TEST(Lu, SecondMinorSingularReportsPivotTwo) {
  // a = [[1,2],[2,4]] over GF(7): second pivot 4 - 2*2 = 0.
  FieldMatrix a(2, 7);
  a(0, 0) = 1; a(0, 1) = 2;
  a(1, 0) = 2; a(1, 1) = 4;
  try {
    lu_decompose(a);
    FAIL() << "expected SingularError";
  } catch (const SingularError& e) {
    EXPECT_EQ(e.pivot(), 2u);
  }
}

TEST(Generate, InvariantsHoldForSampledSeeds) {
  for (std::uint8_t t = 0; t < 10; ++t) {
    const KeyMatrix km = generate_server_matrices(seed_of(t), 4, kP);
    EXPECT_TRUE(key_matrix_valid(km));
    EXPECT_EQ(multiply(km.l, km.u), km.a);
  }
}

TEST(Generate, DeterministicForFixedSeed) {
  const KeyMatrix a = generate_server_matrices(seed_of(3), 4, kP);
  const KeyMatrix b = generate_server_matrices(seed_of(3), 4, kP);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.l, b.l);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.rejection_count, b.rejection_count);
}

TEST(Generate, TinyFieldCannotHoldDistinctPool) {
  // n = 4 needs 10 distinct nonzero entries; GF(7) has 6.
  EXPECT_THROW(generate_server_matrices(seed_of(1), 4, 7), PoolExhausted);
}

TEST(Generate, DimensionOneRejected) {
  EXPECT_THROW(generate_server_matrices(seed_of(1), 1, kP),
               std::invalid_argument);
}

TEST(RowCol, OneBasedExtraction) {
  const auto [l, u] = lu_decompose(worked_a());
  EXPECT_EQ(row(l, 2), (std::vector<std::uint64_t>{5, 1}));
  EXPECT_EQ(col(u, 2), (std::vector<std::uint64_t>{3, 4}));
  const FieldMatrix i2 = FieldMatrix::identity(2, 7);
  EXPECT_EQ(row(i2, 1), (std::vector<std::uint64_t>{1, 0}));
  EXPECT_EQ(col(i2, 2), (std::vector<std::uint64_t>{0, 1}));
  EXPECT_THROW(row(i2, 0), IndexOutOfRange);
  EXPECT_THROW(col(i2, 3), IndexOutOfRange);
}

TEST(Dot, ModularDotProduct) {
  const std::uint64_t a[] = {1, 2};
  const std::uint64_t b[] = {3, 4};
  EXPECT_EQ(dot(a, b, 7), 4u);  // 3 + 8 = 11 = 4 (mod 7)
  const std::uint64_t z[] = {0, 0};
  EXPECT_EQ(dot(z, b, 7), 0u);
  const std::uint64_t one[] = {1};
  EXPECT_THROW(dot(one, b, 7), LengthMismatch);
}

TEST(DeriveKey, MatchesMatrixEntryAndCommutes) {
  const auto [l, u] = lu_decompose(worked_a());
  const KeyMatrix km{worked_a(), l, u, Seed{}, 0};
  EXPECT_EQ(derive_key(km, 2, 1), 3u);
  EXPECT_EQ(derive_key(km, 1, 1), worked_a()(0, 0));
  for (std::size_t x = 1; x <= 2; ++x)
    for (std::size_t y = 1; y <= 2; ++y) {
      EXPECT_EQ(derive_key(km, x, y), worked_a()(x - 1, y - 1));
      EXPECT_EQ(derive_key(km, x, y), derive_key(km, y, x));
    }
  EXPECT_THROW(derive_key(km, 0, 1), IndexOutOfRange);
  EXPECT_THROW(derive_key(km, 1, 3), IndexOutOfRange);
}

TEST(MatchesAnyColumn, ExactColumnsOnly) {
  const auto [l, u] = lu_decompose(worked_a());
  EXPECT_TRUE(matches_any_column(u, col(u, 1)));
  EXPECT_TRUE(matches_any_column(u, col(u, 2)));
  std::vector<std::uint64_t> off = col(u, 2);
  off[0] = gf::add(off[0], 1, 7);
  EXPECT_FALSE(matches_any_column(u, off));
  EXPECT_FALSE(matches_any_column(u, std::vector<std::uint64_t>{3}));
}

TEST(KeyMatrixValid, RejectsBrokenStructures) {
  const KeyMatrix good = generate_server_matrices(seed_of(5), 3, kP);
  EXPECT_TRUE(key_matrix_valid(good));

  KeyMatrix asym = good;
  asym.a(0, 1) = gf::add(asym.a(0, 1), 1, kP);
  EXPECT_FALSE(key_matrix_valid(asym));

  KeyMatrix bad_diag = good;
  bad_diag.l(1, 1) = 2;
  EXPECT_FALSE(key_matrix_valid(bad_diag));

  KeyMatrix dupe = good;
  dupe.a(0, 0) = dupe.a(1, 1);
  EXPECT_FALSE(key_matrix_valid(dupe));
}

}  // namespace
