#include <gtest/gtest.h>

#include <set>

#include "opl1/rng.hpp"

using opl1::Rng;
using opl1::SplitMix64;

TEST(Rng, SplitMixReferenceVector)
{
    SplitMix64 sm(0);
    EXPECT_EQ(sm.next(), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(sm.next(), 0x6E789E6AA1B965F4ULL);
    EXPECT_EQ(sm.next(), 0x06C45D188009454FULL);
}

TEST(Rng, SameSeedSameSequence)
{
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDependOnSeedAndIndexOnly)
{
    Rng x = Rng::stream(7, 3);
    Rng other = Rng::stream(7, 2);
    other.next_u64();
    Rng y = Rng::stream(7, 3);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(x.next_u64(), y.next_u64());
}

TEST(Rng, StreamsAreDistinct)
{
    std::set<std::uint64_t> first;
    for (std::uint64_t s = 0; s < 20; ++s)
        for (std::uint64_t i = 0; i < 50; ++i) first.insert(Rng::stream(s, i).next_u64());
    EXPECT_EQ(first.size(), 1000u);
}

TEST(Rng, UniformRanges)
{
    Rng r(1);
    int lo_hits = 0, hi_hits = 0;
    for (int i = 0; i < 20000; ++i)
    {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const int k = r.uniform_int(-2, 2);
        ASSERT_GE(k, -2);
        ASSERT_LE(k, 2);
        lo_hits += k == -2;
        hi_hits += k == 2;
        const double l = r.log_uniform(1e-3, 1.0);
        ASSERT_GE(l, 1e-3 * (1 - 1e-12));
        ASSERT_LE(l, 1.0);
    }
    EXPECT_GT(lo_hits, 3000);
    EXPECT_GT(hi_hits, 3000);
}

TEST(Rng, NormalMoments)
{
    Rng r(2);
    const int n = 200000;
    double m = 0, v = 0, c = 0;
    for (int i = 0; i < n; ++i)
    {
        const double x = r.normal();
        m += x;
        v += x * x;
        c += std::norm(r.complex_normal());
    }
    EXPECT_NEAR(m / n, 0.0, 0.01);
    EXPECT_NEAR(v / n, 1.0, 0.02);
    EXPECT_NEAR(c / n, 1.0, 0.02);
}

TEST(Rng, SplitAdvancesParent)
{
    Rng a(9), b(9);
    Rng child = a.split();
    b.next_u64();
    EXPECT_EQ(a.next_u64(), b.next_u64());
    EXPECT_NE(child.next_u64(), Rng(9).next_u64());
}

TEST(Rng, StreamIsNotSymmetricInSeedAndIndex)
{
    for (std::uint64_t s = 1; s < 50; ++s)
    {
        if (s != 4)
        {
            EXPECT_NE(Rng::stream(s, 3).next_u64(), Rng::stream(4, s - 1).next_u64());
        }
        EXPECT_NE(Rng::stream(s, s - 1).next_u64(), Rng::stream(s + 1, s).next_u64());
    }
}
