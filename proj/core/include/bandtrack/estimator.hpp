#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bandtrack/models.hpp"

namespace bandtrack {

/// Fixed-order pairwise (tree) summation.
double pairwise_sum(std::span<const double> x) noexcept;

struct MeanStderr {
    double mean = 0.0;
    double stderr = 0.0;
};

/// Sample mean and its standard error (n - 1 denominator; 0 for n = 1).
MeanStderr mean_and_stderr(std::span<const double> x);

/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> x, double q);

inline constexpr std::uint64_t kBootstrapSeed = 0x5EEDB00757A9ULL;

struct LpEstimate {
    double p = 1.0;
    double value = 0.0;
    double stderr = 0.0;
    std::size_t n_paths = 0;
};

/// (mean |x|^p)^{1/p} with a bootstrap standard error.
LpEstimate estimate_lp(std::span<const double> samples, double p, std::size_t resamples = 200,
                       std::uint64_t seed = kBootstrapSeed);

struct ScalingPoint {
    double x = 0.0;
    double value = 0.0;
    double stderr = 0.0;
};

struct ScalingFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<ScalingPoint> points;
};

inline constexpr std::size_t kMinScalingPoints = 4;
inline constexpr double kMinScalingDecades = 1.5;

/// Weighted least squares of ln(value) on ln(x). The weight (value/stderr)^2
/// is the inverse variance of ln(value) to first order; all weights are 1
/// when some stderr is 0.
ScalingFit fit_scaling(std::vector<ScalingPoint> points);

/// Weighted least squares of value on x with weights 1/stderr^2 (1 if some
/// stderr is 0). Needs at least 3 points with distinct x.
ScalingFit fit_linear(std::vector<ScalingPoint> points);

struct TurnoverSweep {
    std::vector<double> deltas{0.2, 0.1, 0.05};
    double horizon = 1.0;
    std::size_t dim = 1;
    std::size_t n_paths = 10000;
    std::uint64_t master_seed = 7;
    double dt_factor = 0.01;  ///< dt = dt_factor * delta^2 for each delta
    Measure measure = Measure::dual_martingale;
    std::size_t workers = 1;
};

struct TurnoverSweepResult {
    ScalingFit fit;  ///< E|vartheta|_T against 1/delta
    std::vector<LpEstimate> turnover;
    std::vector<double> dt;
    double expected_slope = 0.0;  ///< d T / 2
    bool spans_decade = false;
};

/// Terminal turnover of a Brownian target at one delta, with dt = dt_factor * delta^2.
/// The step used is written to *dt_used when given.
LpEstimate expected_turnover(const TurnoverSweep& sweep, double delta, double* dt_used = nullptr);

/// Expected terminal turnover of a Brownian target for each delta, fitted
/// linearly against 1/delta.
TurnoverSweepResult turnover_vs_delta(const TurnoverSweep& sweep);

}  // namespace bandtrack
