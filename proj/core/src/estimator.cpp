#include "bandtrack/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bandtrack/parallel.hpp"
#include "bandtrack/tracker.hpp"

namespace bandtrack {

double pairwise_sum(std::span<const double> x) noexcept {
    if (x.size() <= 8) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

MeanStderr mean_and_stderr(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean_and_stderr: no samples");
    const double n = static_cast<double>(x.size());
    const double mean = pairwise_sum(x) / n;
    if (x.size() == 1) return {mean, 0.0};
    std::vector<double> dev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - mean) * (x[i] - mean);
    const double var = pairwise_sum(dev) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

double quantile(std::vector<double> x, double q) {
    if (x.empty()) throw std::invalid_argument("quantile: no samples");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
    std::sort(x.begin(), x.end());
    const double pos = q * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

namespace {

double lp_of_powers(std::span<const double> powers, double p) {
    return std::pow(pairwise_sum(powers) / static_cast<double>(powers.size()), 1.0 / p);
}

}  // namespace

LpEstimate estimate_lp(std::span<const double> samples, double p, std::size_t resamples,
                       std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("estimate_lp: no samples");
    if (!(p >= 1.0)) throw std::invalid_argument("estimate_lp: p must be at least 1");
    resamples = std::max<std::size_t>(resamples, 200);
    const std::size_t n = samples.size();
    std::vector<double> powers(n);
    for (std::size_t i = 0; i < n; ++i) powers[i] = std::pow(std::fabs(samples[i]), p);

    LpEstimate out{p, lp_of_powers(powers, p), 0.0, n};
    std::vector<double> boot(resamples);
    std::vector<double> draw(n);
    for (std::size_t b = 0; b < resamples; ++b) {
        const CounterRng rng(seed, b);
        for (std::size_t i = 0; i < n; ++i) {
            auto j = static_cast<std::size_t>(rng.uniform(i) * static_cast<double>(n));
            draw[i] = powers[std::min(j, n - 1)];
        }
        boot[b] = lp_of_powers(draw, p);
    }
    const auto ms = mean_and_stderr(boot);
    out.stderr = ms.stderr * std::sqrt(static_cast<double>(resamples));
    return out;
}

namespace {

struct Wls {
    double slope, slope_stderr, intercept, r_squared;
};

Wls weighted_fit(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& w) {
    const std::size_t n = x.size();
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xm = sx / sw, ym = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
        syy += w[i] * (y[i] - ym) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit: abscissae are all equal");
    const double slope = sxy / sxx;
    const double intercept = ym - slope * xm;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - intercept - slope * x[i];
        rss += w[i] * r * r;
    }
    const double se = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
    const double r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    return {slope, se, intercept, r2};
}

bool all_have_stderr(const std::vector<ScalingPoint>& pts) {
    return std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.stderr > 0.0; });
}

}  // namespace

ScalingFit fit_scaling(std::vector<ScalingPoint> points) {
    if (points.size() < kMinScalingPoints) {
        throw std::invalid_argument("fit_scaling: need at least 4 grid points");
    }
    double xmin = INFINITY, xmax = 0.0;
    for (const auto& p : points) {
        if (!(p.value > 0.0) || !std::isfinite(p.value)) {
            throw std::invalid_argument("fit_scaling: nonpositive estimate in grid");
        }
        if (!(p.x > 0.0)) throw std::invalid_argument("fit_scaling: nonpositive abscissa");
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
    }
    if (std::log10(xmax / xmin) < kMinScalingDecades - 1e-9) {
        throw std::invalid_argument("fit_scaling: grid spans fewer than 1.5 decades");
    }
    const bool weighted = all_have_stderr(points);
    std::vector<double> x, y, w;
    for (const auto& p : points) {
        x.push_back(std::log(p.x));
        y.push_back(std::log(p.value));
        w.push_back(weighted ? (p.value / p.stderr) * (p.value / p.stderr) : 1.0);
    }
    const Wls f = weighted_fit(x, y, w);
    return ScalingFit{f.slope, f.slope_stderr, f.intercept, f.r_squared, std::move(points)};
}

ScalingFit fit_linear(std::vector<ScalingPoint> points) {
    if (points.size() < 3) throw std::invalid_argument("fit_linear: need at least 3 points");
    const bool weighted = all_have_stderr(points);
    std::vector<double> x, y, w;
    for (const auto& p : points) {
        if (!std::isfinite(p.value)) throw std::invalid_argument("fit_linear: non-finite value");
        x.push_back(p.x);
        y.push_back(p.value);
        w.push_back(weighted ? 1.0 / (p.stderr * p.stderr) : 1.0);
    }
    const Wls f = weighted_fit(x, y, w);
    return ScalingFit{f.slope, f.slope_stderr, f.intercept, f.r_squared, std::move(points)};
}

LpEstimate expected_turnover(const TurnoverSweep& sweep, double delta, double* dt_used) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("expected_turnover: delta outside (0,1)");
    if (sweep.n_paths == 0) throw std::invalid_argument("expected_turnover: no paths");
    if (!(sweep.dt_factor > 0.0 && sweep.dt_factor <= 0.01)) {
        throw std::invalid_argument("expected_turnover: grid too coarse, need dt <= delta^2/100");
    }
    TargetSpec target;
    target.kind = TargetKind::pure_brownian;
    target.dim = sweep.dim;
    const TimeGrid grid = TimeGrid::with_max_step(sweep.horizon, sweep.dt_factor * delta * delta);
    const ScenarioSimulator sim(ConstantModel{}, target, sweep.measure, grid);
    const auto turnover = parallel_map<double>(sweep.n_paths, sweep.workers, [&](std::size_t i) {
        auto st = sim.stepper(SeedSpec{sweep.master_seed, i});
        std::vector<BandReflector> band(sweep.dim, BandReflector(delta));
        for (std::size_t j = 0; j < sweep.dim; ++j) band[j].start(st.target()[j]);
        for (std::size_t k = 0; k < grid.n_steps(); ++k) {
            st.advance();
            for (std::size_t j = 0; j < sweep.dim; ++j) band[j].reflect(st.target()[j]);
        }
        double total = 0.0;
        for (const auto& b : band) total += b.turnover();
        return total;
    });
    if (dt_used) *dt_used = grid.dt();
    return estimate_lp(turnover, 1.0);
}

TurnoverSweepResult turnover_vs_delta(const TurnoverSweep& sweep) {
    if (sweep.deltas.size() < 3) throw std::invalid_argument("turnover_vs_delta: need 3 deltas");
    const auto [lo, hi] = std::minmax_element(sweep.deltas.begin(), sweep.deltas.end());
    TurnoverSweepResult out;
    out.expected_slope = static_cast<double>(sweep.dim) * sweep.horizon / 2.0;
    out.spans_decade = *hi / *lo >= 10.0 - 1e-9;
    std::vector<ScalingPoint> pts;
    for (double delta : sweep.deltas) {
        double dt = 0.0;
        const LpEstimate est = expected_turnover(sweep, delta, &dt);
        out.turnover.push_back(est);
        out.dt.push_back(dt);
        pts.push_back({1.0 / delta, est.value, est.stderr});
    }
    out.fit = fit_linear(std::move(pts));
    return out;
}

}  // namespace bandtrack
