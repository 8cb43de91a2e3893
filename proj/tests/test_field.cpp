// Exact arithmetic over GF(p): closure, inverses, and the boundary
// behavior the matrix machinery depends on.

#include "luauth/field.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <stdexcept>

namespace gf = luauth::gf;

namespace {

constexpr std::uint64_t kMersenne = gf::kDefaultModulus;

TEST(Field, DefaultModulusIsMersenne61) {
  EXPECT_EQ(kMersenne, (std::uint64_t{1} << 61) - 1);
}

TEST(Field, AddSubNegSmallModulus) {
  EXPECT_EQ(gf::add(3, 5, 7), 1u);
  EXPECT_EQ(gf::sub(3, 5, 7), 5u);
  EXPECT_EQ(gf::neg(3, 7), 4u);
  EXPECT_EQ(gf::neg(0, 7), 0u);
  EXPECT_EQ(gf::reduce(10, 7), 3u);
}

TEST(Field, MulUsesWideIntermediate) {
  // Near-modulus operands would overflow a 64-bit product.
  const std::uint64_t a = kMersenne - 1;
  EXPECT_EQ(gf::mul(a, a, kMersenne), 1u);  // (-1)^2 = 1
  EXPECT_EQ(gf::mul(a, 2, kMersenne), kMersenne - 2);
}

TEST(Field, InverseRoundTripsRandomElements) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t a = rng() % (kMersenne - 1) + 1;
    const std::uint64_t ia = gf::inv(a, kMersenne);
    ASSERT_LT(ia, kMersenne);
    EXPECT_EQ(gf::mul(a, ia, kMersenne), 1u);
  }
  for (std::uint64_t a = 1; a < 7; ++a)
    EXPECT_EQ(gf::mul(a, gf::inv(a, 7), 7), 1u);
}

TEST(Field, InverseOfZeroIsHardError) {
  EXPECT_THROW(gf::inv(0, 7), std::domain_error);
  EXPECT_THROW(gf::inv(0, kMersenne), std::domain_error);
}

TEST(Field, NonInvertibleElementIsHardError) {
  // gcd(3, 9) != 1 — no inverse exists when the modulus is composite.
  EXPECT_THROW(gf::inv(3, 9), std::domain_error);
}

TEST(Field, ArithmeticStaysInRange) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t a = rng() % kMersenne;
    const std::uint64_t b = rng() % kMersenne;
    EXPECT_LT(gf::add(a, b, kMersenne), kMersenne);
    EXPECT_LT(gf::sub(a, b, kMersenne), kMersenne);
    EXPECT_LT(gf::mul(a, b, kMersenne), kMersenne);
  }
}

}  // namespace
