#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bandtrack/paths.hpp"

using namespace bandtrack;

TEST(TimeGrid, Basics) {
    const TimeGrid g(2.0, 8);
    EXPECT_DOUBLE_EQ(g.dt(), 0.25);
    EXPECT_EQ(g.n_points(), 9u);
    EXPECT_DOUBLE_EQ(g.time(3), 0.75);
    EXPECT_EQ(g.time(8), 2.0);
    EXPECT_THROW(TimeGrid(1.0, 0), std::invalid_argument);
    EXPECT_THROW(TimeGrid(0.0, 4), std::invalid_argument);
}

TEST(TimeGrid, WithMaxStep) {
    EXPECT_EQ(TimeGrid::with_max_step(1.0, 1e-4).n_steps(), 10000u);
    EXPECT_EQ(TimeGrid::with_max_step(1.0, 0.3).n_steps(), 4u);
    EXPECT_LE(TimeGrid::with_max_step(1.0, 0.0004).dt(), 0.0004);
}

TEST(BrownianIncrements, DeterministicAndScaled) {
    const TimeGrid g(1.0, 1000);
    const auto a = brownian_increments({3, 17}, g, 2);
    const auto b = brownian_increments({3, 17}, g, 2);
    const auto c = brownian_increments({3, 18}, g, 2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_THROW(brownian_increments({3, 17}, g, 0), std::invalid_argument);
    double ss = 0.0;
    for (double x : a.data()) ss += x * x;
    // Sum of 2000 squared N(0, 1e-3) draws has mean 2 and sd 2*sqrt(2/2000).
    EXPECT_NEAR(ss, 2.0, 4.0 * 2.0 * std::sqrt(2.0 / 2000.0));
}

TEST(BrownianIncrements, StreamMatchesMatrix) {
    const TimeGrid g(1.0, 50);
    const auto m = brownian_increments({1, 2}, g, 3);
    const IncrementStream s({1, 2}, g, 3);
    for (std::size_t k = 0; k < 50; ++k)
        for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(m(k, i), s(k, i));
}

TEST(IntegrateSde, OrnsteinUhlenbeckMoments) {
    const double kappa = 2.0, sigma = 0.5, x0 = 1.0, T = 1.0;
    const TimeGrid g(T, 1000);
    const std::size_t n = 4000;
    double m1 = 0.0, m2 = 0.0;
    const std::vector<double> start{x0};
    for (std::size_t p = 0; p < n; ++p) {
        const auto inc = brownian_increments({5, p}, g, 1);
        const auto path = integrate_sde(
            start, [&](double, auto x, auto out) { out[0] = -kappa * x[0]; },
            [&](double, auto, auto dw, auto out) { out[0] = sigma * dw[0]; }, inc, g);
        const double xt = path.terminal();
        m1 += xt;
        m2 += xt * xt;
    }
    m1 /= n;
    const double var = m2 / n - m1 * m1;
    const double mean_exact = x0 * std::exp(-kappa * T);
    const double var_exact = sigma * sigma * (1.0 - std::exp(-2.0 * kappa * T)) / (2.0 * kappa);
    EXPECT_NEAR(m1, mean_exact, 4.0 * std::sqrt(var_exact / n) + 2e-3);
    EXPECT_NEAR(var, var_exact, 4.0 * var_exact * std::sqrt(2.0 / n) + 2e-3);
}

TEST(IntegrateSde, AbortsOnBlowUp) {
    const TimeGrid g(1.0, 100);
    const auto inc = brownian_increments({1, 1}, g, 1);
    const std::vector<double> start{1.0};
    EXPECT_THROW(integrate_sde(
                     start, [](double, auto x, auto out) { out[0] = x[0] * x[0] * 1e300; },
                     [](double, auto, auto, auto out) { out[0] = 0.0; }, inc, g),
                 NumericalAbort);
}

TEST(StochasticIntegral, DiscreteItoIdentity) {
    // Left-point sum of W dW equals (W_T^2 - sum dW^2) / 2 exactly.
    const TimeGrid g(1.0, 5000);
    const auto inc = brownian_increments({9, 0}, g, 1);
    Path w(g, 1);
    for (std::size_t k = 0; k < g.n_steps(); ++k) w(k + 1, 0) = w(k, 0) + inc(k, 0);
    const auto ito = stochastic_integral(w, w);
    const auto qv = quadratic_variation(w);
    const double wt = w.terminal();
    EXPECT_NEAR(ito.terminal(), 0.5 * (wt * wt - qv.terminal()), 1e-12);
    EXPECT_NEAR(qv.terminal(), 1.0, 4.0 * std::sqrt(2.0 / 5000.0));
}

TEST(StochasticIntegral, MismatchThrows) {
    const Path a(TimeGrid(1.0, 10), 1), b(TimeGrid(1.0, 11), 1), c(TimeGrid(1.0, 10), 2);
    EXPECT_THROW(stochastic_integral(a, b), std::invalid_argument);
    EXPECT_THROW(stochastic_integral(a, c), std::invalid_argument);
}

TEST(QuadraticCovariation, IndependentNearZero) {
    const TimeGrid g(1.0, 10000);
    const auto inc = brownian_increments({4, 4}, g, 2);
    Path a(g, 1), b(g, 1);
    for (std::size_t k = 0; k < g.n_steps(); ++k) {
        a(k + 1, 0) = a(k, 0) + inc(k, 0);
        b(k + 1, 0) = b(k, 0) + inc(k, 1);
    }
    EXPECT_NEAR(quadratic_covariation(a, b).terminal(), 0.0, 4.0 * std::sqrt(1.0 / 10000.0));
    EXPECT_DOUBLE_EQ(quadratic_covariation(a, a).terminal(), quadratic_variation(a).terminal());
}

TEST(Path, FiniteCheck) {
    Path p(TimeGrid(1.0, 3), 1);
    EXPECT_TRUE(p.all_finite());
    p(2, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_FALSE(p.all_finite());
}
