#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bandtrack/estimator.hpp"
#include "bandtrack/models.hpp"
#include "bandtrack/utility.hpp"

using namespace bandtrack;

TEST(Merton, ClosedForm) {
    ConstantModel m;
    m.mu = 0.05;
    m.sigma = 0.2;
    m.risk_aversion = 1.0;
    EXPECT_DOUBLE_EQ(merton_strategy(m), 1.25);
}

TEST(Merton, MaximizesExpectedUtilityOnGrid) {
    // E[-exp(-r th (mu T + sigma W_T))] = -exp(-r th mu T + r^2 th^2 sigma^2 T / 2).
    ConstantModel m;
    m.mu = 0.05;
    const double r = m.risk_aversion, T = 1.0;
    double best = -1e300, arg = 0.0;
    for (int i = 0; i <= 30000; ++i) {
        const double th = i * 1e-4;
        const double eu = -std::exp(-r * th * m.mu * T + 0.5 * r * r * th * th * m.sigma * m.sigma * T);
        if (eu > best) {
            best = eu;
            arg = th;
        }
    }
    EXPECT_NEAR(arg, merton_strategy(m), 1e-4);
}

TEST(Girsanov, DensityMoments) {
    const double lambda = 0.25;
    const TimeGrid g(1.0, 100);
    const std::size_t n = 40000;
    std::vector<double> terminal(n);
    const Path lam(g, 1, lambda);
    for (std::size_t p = 0; p < n; ++p) {
        auto inc = brownian_increments({21, p}, g, 1);
        for (std::size_t k = 0; k < g.n_steps(); ++k) inc(k, 0) += lambda * g.dt();
        const auto z = girsanov_density(lam, inc, g);
        ASSERT_EQ(z(0, 0), 1.0);
        terminal[p] = z.terminal();
    }
    const auto ms = mean_and_stderr(terminal);
    EXPECT_NEAR(ms.mean, 1.0, 4.0 * ms.stderr);
    double var = 0.0;
    for (double z : terminal) var += (z - ms.mean) * (z - ms.mean);
    var /= static_cast<double>(n - 1);
    EXPECT_NEAR(var, std::expm1(lambda * lambda), 0.004);
}

TEST(Scenario, DualMeasurePriceIsMartingale) {
    KimOmbergModel ko;
    TargetSpec target;
    target.kind = TargetKind::kim_omberg;
    const ScenarioSimulator sim(ko, target, Measure::dual_martingale, TimeGrid(1.0, 200));
    std::vector<double> gain(4000);
    for (std::size_t p = 0; p < gain.size(); ++p) {
        const auto sc = sim.simulate({3, p});
        gain[p] = sc.price.terminal() - sc.price(0, 0);
    }
    const auto ms = mean_and_stderr(gain);
    EXPECT_NEAR(ms.mean, 0.0, 3.0 * ms.stderr);
}

TEST(Scenario, PhysicalPriceHasDrift) {
    ConstantModel m;
    m.mu = 0.3;
    TargetSpec target;
    target.kind = TargetKind::merton;
    const ScenarioSimulator sim(m, target, Measure::physical, TimeGrid(1.0, 50));
    std::vector<double> gain(4000);
    for (std::size_t p = 0; p < gain.size(); ++p) {
        const auto sc = sim.simulate({3, p});
        gain[p] = sc.price.terminal() - sc.price(0, 0);
        ASSERT_EQ(sc.target(0, 0), merton_strategy(m));
    }
    const auto ms = mean_and_stderr(gain);
    EXPECT_NEAR(ms.mean, 0.3, 4.0 * ms.stderr);
}

TEST(Scenario, UnsupportedPairsThrow) {
    TargetSpec ko_target;
    ko_target.kind = TargetKind::kim_omberg;
    EXPECT_THROW(ScenarioSimulator(ConstantModel{}, ko_target, Measure::physical, TimeGrid(1, 10)),
                 std::invalid_argument);
    TargetSpec brownian;
    EXPECT_THROW(ScenarioSimulator(KimOmbergModel{}, brownian, Measure::physical, TimeGrid(1, 10)),
                 std::invalid_argument);
    ko_target.dim = 2;
    EXPECT_THROW(ScenarioSimulator(KimOmbergModel{}, ko_target, Measure::physical, TimeGrid(1, 10)),
                 std::invalid_argument);
    ko_target.dim = 1;
    EXPECT_THROW(ScenarioSimulator(KimOmbergModel{}, ko_target, Measure::physical, TimeGrid(2, 10)),
                 std::invalid_argument);
}

TEST(Scenario, StepperMatchesSimulate) {
    TargetSpec target;
    target.kind = TargetKind::kim_omberg;
    const ScenarioSimulator sim(KimOmbergModel{}, target, Measure::physical, TimeGrid(1.0, 100));
    const auto sc = sim.simulate({8, 2});
    auto st = sim.stepper({8, 2});
    for (std::size_t k = 1; k <= 100; ++k) {
        st.advance();
        ASSERT_EQ(st.price()[0], sc.price(k, 0));
        ASSERT_EQ(st.target()[0], sc.target(k, 0));
    }
}

TEST(KimOmberg, ReducesToMyopicWithoutDriftNoise) {
    KimOmbergModel m;
    m.sigma_mu = 0.0;
    const auto tab = riccati_solve(m);
    for (double mu : {-0.1, 0.0, 0.07}) {
        EXPECT_NEAR(ko_strategy(m, tab, 0.4, mu), mu / (m.sigma_s * m.sigma_s), 1e-12);
    }
}

TEST(KimOmberg, FirstOrderConditionHolds) {
    // U'(X_T) / E U'(X_T) = dQ/dP for the Riccati strategy, and not for 2x it.
    const KimOmbergModel m;
    TargetSpec target;
    target.kind = TargetKind::kim_omberg;
    const ScenarioSimulator sim(m, target, Measure::physical, TimeGrid(1.0, 1000));
    const std::size_t n = 20000;
    std::vector<double> x_opt(n), x_bad(n), dens(n);
    for (std::size_t p = 0; p < n; ++p) {
        auto st = sim.stepper({77, p});
        double x1 = 0.0, x2 = 0.0;
        for (std::size_t k = 0; k < 1000; ++k) {
            const double th = st.target()[0], s = st.price()[0];
            st.advance();
            x1 += th * (st.price()[0] - s);
            x2 += 2.0 * th * (st.price()[0] - s);
        }
        x_opt[p] = x1;
        x_bad[p] = x2;
        dens[p] = std::exp(st.log_density());
    }
    const ExponentialUtility u(m.risk_aversion);
    const auto good = foc_residual(x_opt, dens, u);
    const auto bad = foc_residual(x_bad, dens, u);
    EXPECT_LT(good.rms, 0.02);
    EXPECT_GT(bad.rms, 5.0 * good.rms);
}

TEST(Diagnostics, FiniteOnKimOmberg) {
    TargetSpec target;
    target.kind = TargetKind::kim_omberg;
    const ScenarioSimulator sim(KimOmbergModel{}, target, Measure::physical, TimeGrid(1.0, 200));
    std::vector<MarketScenario> ens;
    for (std::size_t p = 0; p < 200; ++p) ens.push_back(sim.simulate({1, p}));
    const auto rep = assumption_diagnostics(ens, 2.0, 0.1);
    EXPECT_TRUE(rep.all_finite());
    EXPECT_EQ(rep.n_paths, 200u);
    EXPECT_GE(rep.exp_qv_price.mean, 1.0);
    EXPECT_THROW(assumption_diagnostics(std::span<const MarketScenario>{}, 2.0, 0.1),
                 std::invalid_argument);
}
