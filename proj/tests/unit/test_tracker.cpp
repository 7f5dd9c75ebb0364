#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bandtrack/models.hpp"
#include "bandtrack/tracker.hpp"

using namespace bandtrack;

namespace {

Path make_path(const TimeGrid& g, double (*f)(double)) {
    Path p(g, 1);
    for (std::size_t k = 0; k < g.n_points(); ++k) p(k, 0) = f(g.time(k));
    return p;
}

double ramp(double t) { return t; }
double sine(double t) { return std::sin(2.0 * std::numbers::pi * t); }

Path brownian_target(const TimeGrid& g, std::size_t path) {
    TargetSpec spec;
    return simulate_scenario(ConstantModel{}, spec, Measure::dual_martingale, {5, path}, g).target;
}

}  // namespace

TEST(BandReflector, MovesOnlyToBandEdge) {
    BandReflector b(0.2);
    EXPECT_EQ(b.start(0.1), 0.0);
    EXPECT_EQ(b.reflect(0.15), 0.0);
    EXPECT_NEAR(b.reflect(0.5), 0.3, 1e-15);
    EXPECT_NEAR(b.position(), 0.3, 1e-15);
    EXPECT_NEAR(b.reflect(-0.1), -0.2, 1e-15);
    EXPECT_NEAR(b.turnover(), 0.5, 1e-15);
}

TEST(Tracker, RampIsExact) {
    const TimeGrid g(1.0, 1000);
    const auto run = track_shares(make_path(g, ramp), {0.2, TrackingMode::shares});
    for (std::size_t k = 0; k < g.n_points(); ++k) {
        EXPECT_NEAR(run.position(k, 0), std::max(0.0, g.time(k) - 0.2), 1e-12);
    }
    EXPECT_NEAR(run.turnover.terminal(), 0.8, 1e-12);
    EXPECT_EQ(run.initial_jump, 0.0);
    EXPECT_NEAR(run.terminal_liquidation, 0.8, 1e-12);
}

TEST(Tracker, SineTurnover) {
    // Up 0.8 to the first peak, down 1.6 to the trough, up 0.6 by t = 1.
    const TimeGrid g(1.0, 10000);
    const auto run = track_shares(make_path(g, sine), {0.2, TrackingMode::shares});
    EXPECT_NEAR(run.turnover.terminal(), 3.0, 0.01 * 3.0);
}

TEST(Tracker, InitialJumpCounted) {
    const TimeGrid g(1.0, 10);
    const Path theta(g, 1, 0.5);
    const auto run = track_shares(theta, {0.2, TrackingMode::shares});
    EXPECT_NEAR(run.initial_jump, 0.3, 1e-15);
    EXPECT_NEAR(run.turnover.terminal(), 0.3, 1e-15);
    EXPECT_NEAR(run.trades(0, 0), 0.3, 1e-15);
    EXPECT_NEAR(run.position.terminal(), 0.3, 1e-15);
}

TEST(Tracker, BandInvariantAndMinimality) {
    const TimeGrid g(1.0, 5000);
    const double delta = 0.1;
    const auto theta = brownian_target(g, 3);
    const auto run = track_shares(theta, {delta, TrackingMode::shares});
    for (std::size_t k = 0; k < g.n_points(); ++k) {
        const double gap = theta(k, 0) - run.position(k, 0);
        ASSERT_LE(std::fabs(gap), delta + 1e-12);
        if (run.trades(k, 0) != 0.0) {
            // A trade always leaves the target exactly on the band edge.
            ASSERT_NEAR(std::fabs(gap), delta, 1e-12);
        }
        ASSERT_NEAR(run.xi_realized(k, 0), gap / delta, 1e-12);
    }
}

TEST(Tracker, MonetaryWithUnitPriceReproducesSharesLedger) {
    const TimeGrid g(1.0, 2000);
    const auto theta = brownian_target(g, 9);
    const Path price(g, 1, 1.0);
    std::ostringstream a, b;
    write_ledger_csv(a, track_shares(theta, {0.1, TrackingMode::shares}));
    write_ledger_csv(b, track_monetary(theta, price, {0.1, TrackingMode::monetary}));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().substr(0, 38), "t,asset,trade,position,target,turnover");
}

TEST(Tracker, MonetaryPositionDriftsWithPrice) {
    const TimeGrid g(1.0, 2);
    Path theta(g, 1, 1.0);
    Path price(g, 1, 1.0);
    price(1, 0) = 1.05;
    price(2, 0) = 1.05;
    const auto run = track_monetary(theta, price, {0.1, TrackingMode::monetary});
    EXPECT_NEAR(run.position(0, 0), 0.9, 1e-15);
    EXPECT_NEAR(run.position(1, 0), 0.945, 1e-15);  // drifted, still inside the band
    EXPECT_EQ(run.trades(1, 0), 0.0);
}

TEST(Tracker, ModeChecks) {
    const TimeGrid g(1.0, 4);
    const Path theta(g, 1);
    EXPECT_THROW(track_shares(theta, {0.1, TrackingMode::monetary}), std::invalid_argument);
    Path bad(g, 1, 1.0);
    bad(2, 0) = 0.0;
    EXPECT_THROW(track_monetary(theta, bad, {0.1, TrackingMode::monetary}), NumericalAbort);
}

TEST(Tracker, RefinementConverges) {
    const double dts[] = {1e-2, 1e-3, 1e-4};
    const auto rows = refine_check([](const TimeGrid& g) { return make_path(g, sine); }, 1.0,
                                   {0.2, TrackingMode::shares}, dts);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].cauchy_diff, 0.0);
    EXPECT_LT(rows[2].cauchy_diff, rows[1].cauchy_diff + 1e-12);
    EXPECT_NEAR(rows[2].turnover, 3.0, 1e-3);
    const double bad[] = {1e-3, 1e-2};
    EXPECT_THROW(refine_check([](const TimeGrid& g) { return make_path(g, sine); }, 1.0,
                              {0.2, TrackingMode::shares}, bad),
                 std::invalid_argument);
}
