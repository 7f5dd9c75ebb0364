#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bandtrack/rng.hpp"
#include "bandtrack/utility.hpp"

using namespace bandtrack;

TEST(Utility, Values) {
    const ExponentialUtility u(1.0);
    EXPECT_DOUBLE_EQ(u.value(0.0), -1.0);
    EXPECT_NEAR(u.value(std::log(2.0)), -0.5, 1e-15);
    EXPECT_DOUBLE_EQ(evaluate_utility(u, 0.0), -1.0);
    EXPECT_THROW(ExponentialUtility(0.0), std::invalid_argument);
}

TEST(Utility, ConcaveOnRandomPairs) {
    const ExponentialUtility u(2.0);
    const CounterRng rng(4, 0);
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const double a = 3.0 * rng.normal(2 * k), b = 3.0 * rng.normal(2 * k + 1);
        EXPECT_GE(u.value(0.5 * (a + b)), 0.5 * (u.value(a) + u.value(b)) - 1e-15);
    }
}

TEST(Utility, RiskAversionAndEnvelope) {
    const ExponentialUtility u(1.7);
    for (double x : {-2.0, 0.0, 0.3, 5.0}) {
        EXPECT_NEAR(u.absolute_risk_aversion(x), 1.7, 1e-14);
        EXPECT_NEAR(u.marginal_lower_envelope(x, 1.7), u.marginal(x), 1e-14 * u.marginal(x));
        EXPECT_NEAR(u.marginal_upper_envelope(x, 1.7), u.marginal(x), 1e-14 * u.marginal(x));
    }
    // With r < 1.7 < R the envelopes bracket U' on x >= 0.
    for (double x : {0.0, 0.3, 5.0}) {
        EXPECT_LE(u.marginal_lower_envelope(x, 2.0), u.marginal(x) * (1 + 1e-14));
        EXPECT_GE(u.marginal_upper_envelope(x, 1.5), u.marginal(x) * (1 - 1e-14));
    }
}

TEST(Foc, ZeroLambdaIsExactlyZero) {
    const std::vector<double> x(1000, 3.0), d(1000, 1.0);
    const auto r = foc_residual(x, d, ExponentialUtility(1.0));
    EXPECT_EQ(r.rms, 0.0);
    EXPECT_EQ(r.max_abs, 0.0);
    EXPECT_EQ(r.n, 1000u);
}

TEST(Foc, TranslationInvariant) {
    const CounterRng rng(2, 2);
    std::vector<double> x(500), xs(500), d(500);
    for (std::size_t i = 0; i < 500; ++i) {
        x[i] = rng.normal(i);
        xs[i] = x[i] + 0.75;
        d[i] = std::exp(-0.5 * x[i]);
    }
    const ExponentialUtility u(1.0);
    EXPECT_NEAR(foc_residual(x, d, u).rms, foc_residual(xs, d, u).rms, 1e-12);
}

TEST(Foc, Errors) {
    const std::vector<double> empty, one{1.0}, two{1.0, 2.0};
    const ExponentialUtility u(1.0);
    EXPECT_THROW(foc_residual(empty, empty, u), std::invalid_argument);
    EXPECT_THROW(foc_residual(one, two, u), std::invalid_argument);
}

TEST(Loss, ZeroForIdenticalWealth) {
    const std::vector<double> x{0.1, -0.2, 0.5};
    const auto l = utility_loss(x, x, ExponentialUtility(1.0));
    EXPECT_EQ(l.loss, 0.0);
    EXPECT_EQ(l.stderr, 0.0);
}

TEST(Loss, MonotoneInCost) {
    // Costs lower every frictional wealth, so the loss cannot decrease.
    const CounterRng rng(8, 1);
    std::vector<double> free(200), turnover(200);
    for (std::size_t i = 0; i < 200; ++i) {
        free[i] = rng.normal(i);
        turnover[i] = std::fabs(rng.normal(1000 + i));
    }
    const ExponentialUtility u(1.0);
    double prev = -1.0;
    for (double eps : {0.0, 1e-3, 1e-2, 1e-1}) {
        std::vector<double> fric(200);
        for (std::size_t i = 0; i < 200; ++i) fric[i] = free[i] - eps * turnover[i];
        const double loss = utility_loss(fric, free, u).loss;
        EXPECT_GE(loss, prev);
        prev = loss;
    }
}

TEST(Loss, SizeMismatchThrows) {
    const std::vector<double> a{1.0}, b{1.0, 2.0};
    EXPECT_THROW(utility_loss(a, b, ExponentialUtility(1.0)), std::invalid_argument);
}
