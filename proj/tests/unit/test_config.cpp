#include <gtest/gtest.h>

#include <algorithm>

#include "bandtrack/config.hpp"

using namespace bandtrack;

namespace {
bool mentions(const std::vector<std::string>& v, const std::string& s) {
    return std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.find(s) != std::string::npos; });
}
}  // namespace

TEST(Config, BaselinesAreValid) {
    for (const auto& name : experiment_names()) {
        const auto v = validate_config(default_config(name));
        EXPECT_TRUE(v.empty()) << name << ": " << (v.empty() ? "" : v.front());
    }
}

TEST(Config, ParsesKeyValueText) {
    const auto cfg = parse_config(
        "# comment\n"
        "n_paths = 123\n"
        "seed=9  # trailing\n"
        "epsilon_grid=logspace:-4:-2:5\n"
        "delta_grid=0.3, 0.2\n"
        "target=deterministic_sine\n",
        default_config("tracking_error"));
    EXPECT_EQ(cfg.n_paths, 123u);
    EXPECT_EQ(cfg.master_seed, 9u);
    ASSERT_EQ(cfg.epsilon_grid.size(), 5u);
    EXPECT_NEAR(cfg.epsilon_grid[1], std::pow(10.0, -3.5), 1e-18);
    EXPECT_EQ(cfg.delta_grid, (std::vector<double>{0.3, 0.2}));
    EXPECT_EQ(cfg.target.kind, TargetKind::deterministic_sine);
    EXPECT_EQ(cfg.deltas(), cfg.delta_grid);
}

TEST(Config, ErrorsAreLineAnchored) {
    try {
        parse_config("n_paths=10\n\nbogus=1\n", ExperimentConfig{});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    try {
        parse_config("dt=abc\n", ExperimentConfig{});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 1u);
    }
    EXPECT_THROW(parse_config("no equals sign\n", ExperimentConfig{}), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/file.cfg", ExperimentConfig{}), ConfigError);
}

TEST(Config, CoarseStepViolatesCoupling) {
    auto cfg = default_config("sharpness");
    cfg.dt = 1e-3;
    EXPECT_TRUE(mentions(validate_config(cfg), "grid coupling"));
    cfg.dt = 0.0;
    cfg.dt_factor = 0.02;
    EXPECT_TRUE(mentions(validate_config(cfg), "grid coupling"));
}

TEST(Config, EpsilonOutsideUnitInterval) {
    auto cfg = default_config("tracking_error");
    cfg.epsilon_grid = {1.5, 1e-2, 1e-3, 1e-4};
    EXPECT_TRUE(mentions(validate_config(cfg), "epsilon must lie in (0,1)"));
}

TEST(Config, PairingRules) {
    auto cfg = default_config("foc_check");
    cfg.measure = Measure::dual_martingale;
    EXPECT_TRUE(mentions(validate_config(cfg), "measure"));
    cfg = default_config("sharpness");
    cfg.target.kind = TargetKind::kim_omberg;
    EXPECT_TRUE(mentions(validate_config(cfg), "target"));
}

TEST(Config, ResolvedEntriesSkipRuntimeOnlyKeys) {
    auto cfg = default_config("sharpness");
    cfg.workers = 16;
    cfg.output_dir = "/tmp/x";
    const auto e = resolved_entries(cfg);
    for (const auto& [k, v] : e) {
        EXPECT_NE(k, "workers");
        EXPECT_NE(k, "output_dir");
    }
    // Round trip through text reproduces the same entries.
    std::string text;
    for (const auto& [k, v] : e) text += k + "=" + v + "\n";
    EXPECT_EQ(resolved_entries(parse_config(text, ExperimentConfig{})), e);
}
