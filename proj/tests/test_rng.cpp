#include "equivcheck/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

using equivcheck::derive_seed;
using equivcheck::Rng;

TEST(Rng, StableHashIsFnv1a) {
    // FNV-1a 64 test vectors
    EXPECT_EQ(equivcheck::stable_hash(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(equivcheck::stable_hash("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(equivcheck::stable_hash("foobar"), 0x85944171f73967e8ULL);
}

TEST(Rng, DerivedSeedsDependOnEveryPart) {
    std::set<std::uint64_t> seen;
    for (const char* m : {"delta_v_l", "t_nr"}) {
        for (const char* d : {"reference", "candidate"}) {
            for (const char* f : {"gamma", "normal"}) {
                seen.insert(derive_seed(7, {"fit", m, d, f}));
            }
        }
    }
    EXPECT_EQ(seen.size(), 8U);
    EXPECT_EQ(derive_seed(7, {"a", "bc"}) == derive_seed(7, {"ab", "c"}), false);
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_EQ(derive_seed(99, {"x"}), derive_seed(99, {"x"}));
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a.normal(), b.normal());
        ASSERT_EQ(a.gamma(0.3), b.gamma(0.3));
    }
}

TEST(Rng, UniformIndexCoversRange) {
    Rng r(3);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        ++counts[r.uniform_index(7)];
    }
    for (int c : counts) {
        EXPECT_NEAR(c, 10000, 400);
    }
}

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

template <class F>
Moments moments(F&& draw, int n) {
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = draw();
        s += x;
        s2 += x * x;
    }
    const double m = s / n;
    return {m, s2 / n - m * m};
}

}  // namespace

TEST(Rng, DistributionMoments) {
    Rng r(11);
    const int n = 200000;
    const auto u = moments([&] { return r.uniform(); }, n);
    EXPECT_NEAR(u.mean, 0.5, 0.003);
    EXPECT_NEAR(u.var, 1.0 / 12.0, 0.001);
    const auto z = moments([&] { return r.normal(); }, n);
    EXPECT_NEAR(z.mean, 0.0, 0.01);
    EXPECT_NEAR(z.var, 1.0, 0.01);
    const auto e = moments([&] { return r.exponential(2.0); }, n);
    EXPECT_NEAR(e.mean, 0.5, 0.005);
    EXPECT_NEAR(e.var, 0.25, 0.005);
    for (double shape : {0.3, 1.0, 4.5}) {
        const auto g = moments([&] { return r.gamma(shape); }, n);
        EXPECT_NEAR(g.mean, shape, 0.015 * std::sqrt(shape) + 0.005) << shape;
        EXPECT_NEAR(g.var, shape, 0.04 * shape + 0.01) << shape;
    }
    const auto b = moments([&] { return r.beta(2.0, 5.0); }, n);
    EXPECT_NEAR(b.mean, 2.0 / 7.0, 0.002);
    EXPECT_NEAR(b.var, 10.0 / (49.0 * 8.0), 0.001);
}
