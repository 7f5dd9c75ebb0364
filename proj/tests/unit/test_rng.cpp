#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bandtrack/rng.hpp"

using namespace bandtrack;

TEST(CounterRng, SameCoordinatesSameDraw) {
    const CounterRng a(42, 5), b(42, 5);
    for (std::uint64_t c = 0; c < 100; ++c) EXPECT_EQ(a.bits(c), b.bits(c));
}

TEST(CounterRng, StreamsDiffer) {
    const CounterRng a(42, 5), b(42, 6), c(43, 5);
    int same_stream = 0, same_seed = 0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        same_stream += a.bits(k) == b.bits(k);
        same_seed += a.bits(k) == c.bits(k);
    }
    EXPECT_EQ(same_stream, 0);
    EXPECT_EQ(same_seed, 0);
}

TEST(CounterRng, UniformInOpenInterval) {
    const CounterRng r(1, 0);
    double sum = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double u = r.uniform(k);
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(NormalQuantile, KnownValues) {
    EXPECT_DOUBLE_EQ(standard_normal_quantile(0.5), 0.0);
    EXPECT_NEAR(standard_normal_quantile(0.975), 1.959963984540054, 1e-14);
    EXPECT_NEAR(standard_normal_quantile(0.025), -1.959963984540054, 1e-14);
    EXPECT_NEAR(standard_normal_quantile(0.8413447460685429), 1.0, 1e-13);
    EXPECT_NEAR(standard_normal_quantile(1e-10), -6.361340902404056, 1e-11);
    EXPECT_NEAR(standard_normal_quantile(1.0 - 1e-7), 5.199337582187471, 1e-8);
}

TEST(NormalQuantile, InvertsErfc) {
    for (double x = -7.0; x <= 7.0; x += 0.37) {
        const double u = 0.5 * std::erfc(-x / std::sqrt(2.0));
        // u itself carries ~1e-16 rounding, amplified by 1/phi(x) in the upper tail.
        const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        EXPECT_NEAR(standard_normal_quantile(u), x, 1e-9 * (1.0 + std::fabs(x)) + 4e-16 / phi)
            << "x=" << x;
    }
}

TEST(CounterRng, NormalMoments) {
    const CounterRng r(9, 2);
    const int n = 400000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int k = 0; k < n; ++k) {
        const double z = r.normal(k);
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
}
