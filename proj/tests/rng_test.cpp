#include <gtest/gtest.h>

#include <set>

#include "wht/rng.hpp"

namespace wht {
namespace {

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswers) {
  using A2 = std::array<std::uint32_t, 2>;
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(Philox4x32::block(A2{0, 0}, A4{0, 0, 0, 0}),
            (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::block(A2{0xffffffff, 0xffffffff},
                              A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::block(A2{0xa4093822, 0x299f31d0},
                              A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, SameSeedSameStream) {
  Philox4x32 a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    EXPECT_EQ(x, y);
    differs |= x != z;
  }
  EXPECT_TRUE(differs);
}

TEST(Philox, UniformInOpenInterval) {
  Philox4x32 r(1);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(Philox, NormalMoments) {
  Philox4x32 r(9);
  double m1 = 0.0, m2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    m1 += z;
    m2 += z * z;
  }
  EXPECT_NEAR(m1 / n, 0.0, 0.02);
  EXPECT_NEAR(m2 / n, 1.0, 0.03);
}

TEST(Philox, BelowStaysInRange) {
  Philox4x32 r(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(SampleWithoutReplacement, DistinctAndInRange) {
  Philox4x32 r(77);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = sample_without_replacement(r, 30, 12);
    ASSERT_EQ(s.size(), 12u);
    std::set<std::size_t> u(s.begin(), s.end());
    EXPECT_EQ(u.size(), 12u);
    EXPECT_LT(*u.rbegin(), 30u);
  }
  const auto all = sample_without_replacement(r, 5, 5);
  EXPECT_EQ(std::set<std::size_t>(all.begin(), all.end()).size(), 5u);
}

TEST(MixSeed, SpreadsNeighbouringInputs) {
  std::set<std::uint64_t> out;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) out.insert(mix_seed(a, b));
  EXPECT_EQ(out.size(), 400u);
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
}

}  // namespace
}  // namespace wht
