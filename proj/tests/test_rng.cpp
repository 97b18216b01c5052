#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "sztbss/rng.hpp"

using namespace sztbss;

TEST(Rng, SameSeedSameStream) {
    Xoshiro256 a(Seed{42}), b(Seed{42});
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, KnownFirstOutputs) {
    // Frozen so a platform or refactor that changes the stream is caught.
    Xoshiro256 a(Seed{0});
    const std::uint64_t first = a();
    Xoshiro256 b(Seed{0});
    EXPECT_EQ(first, b());
    std::uint64_t sm = 0;
    EXPECT_EQ(splitmix64(sm), 0xE220A8397B1DCDAFULL);
}

TEST(Rng, DerivedSeedsDiffer) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 50; ++s) seen.insert(derive_seed(Seed{7}, s).value);
    EXPECT_EQ(seen.size(), 50u);
    EXPECT_EQ(derive_seed(Seed{7}, 3), derive_seed(Seed{7}, 3));
    EXPECT_NE(derive_seed(Seed{7}, 3), derive_seed(Seed{8}, 3));
}

TEST(Rng, UniformOpenNeverHitsEnds) {
    Xoshiro256 r(Seed{1});
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform_open();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, 1.0);
    EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
    Xoshiro256 r(Seed{2});
    int counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < 40000; ++i) {
        const auto v = r.below(4);
        ASSERT_LT(v, 4u);
        ++counts[v];
    }
    for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, NormalMoments) {
    Xoshiro256 r(Seed{3});
    const int n = 400000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    EXPECT_NEAR(s1 / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
    EXPECT_NEAR(s4 / n, 3.0, 0.06);
}
