#include "bandtrack/tracker.hpp"

#include <ostream>
#include <stdexcept>

#include "bandtrack/csv.hpp"

namespace bandtrack {

std::string to_string(TrackingMode m) { return m == TrackingMode::shares ? "shares" : "monetary"; }

namespace {

TrackerRun make_run(const Path& theta, const BandConfig& cfg) {
    if (!(cfg.delta > 0.0)) {
        throw std::invalid_argument("band half-width delta must be positive");
    }
    const auto& grid = theta.grid();
    const std::size_t d = theta.dim();
    return TrackerRun{cfg.mode,      cfg.delta,     theta,         Path(grid, d),
                      Path(grid, d), Path(grid, d), Path(grid, 1), Path(grid, d)};
}

}  // namespace

TrackerRun track_shares(const Path& theta, const BandConfig& cfg) {
    if (cfg.mode != TrackingMode::shares) {
        throw std::invalid_argument("track_shares needs a shares-mode band");
    }
    TrackerRun run = make_run(theta, cfg);
    const std::size_t d = theta.dim();
    std::vector<BandReflector> bands(d, BandReflector(cfg.delta));

    for (std::size_t k = 0; k < theta.n_points(); ++k) {
        double turnover = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            auto& band = bands[i];
            run.trades(k, i) = k == 0 ? band.start(theta(0, i)) : band.reflect(theta(k, i));
            run.vartheta(k, i) = band.position();
            run.position(k, i) = band.position();
            run.xi_realized(k, i) = band.deviation(theta(k, i));
            turnover += band.turnover();
        }
        run.turnover(k, 0) = turnover;
    }
    for (const auto& band : bands) {
        run.initial_jump += band.initial_jump();
        run.terminal_liquidation += std::fabs(band.position());
    }
    return run;
}

TrackerRun track_monetary(const Path& theta, const Path& price, const BandConfig& cfg) {
    if (cfg.mode != TrackingMode::monetary) {
        throw std::invalid_argument("track_monetary needs a monetary-mode band");
    }
    if (!(price.grid() == theta.grid()) || price.dim() != theta.dim()) {
        throw std::invalid_argument("track_monetary: price and target differ in grid or dimension");
    }
    TrackerRun run = make_run(theta, cfg);
    const std::size_t d = theta.dim();
    std::vector<BandReflector> bands(d, BandReflector(cfg.delta));
    std::vector<double> transferred(d, 0.0);

    for (std::size_t k = 0; k < theta.n_points(); ++k) {
        double turnover = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            if (!(price(k, i) > 0.0)) {
                throw NumericalAbort("track_monetary: nonpositive price at step " +
                                     std::to_string(k));
            }
            auto& band = bands[i];
            if (k > 0) band.grow(1.0 + (price(k, i) - price(k - 1, i)) / price(k - 1, i));
            const double trade = k == 0 ? band.start(theta(0, i)) : band.reflect(theta(k, i));
            transferred[i] += trade;
            run.trades(k, i) = trade;
            run.vartheta(k, i) = transferred[i];
            run.position(k, i) = band.position();
            run.xi_realized(k, i) = band.deviation(theta(k, i));
            turnover += band.turnover();
        }
        run.turnover(k, 0) = turnover;
    }
    for (const auto& band : bands) {
        run.initial_jump += band.initial_jump();
        run.terminal_liquidation += std::fabs(band.position());
    }
    return run;
}

std::vector<RefinementRow> refine_check(const TargetGenerator& generator, double horizon,
                                        const BandConfig& cfg, std::span<const double> dt_list) {
    std::vector<RefinementRow> rows;
    rows.reserve(dt_list.size());
    for (std::size_t j = 0; j < dt_list.size(); ++j) {
        if (j > 0 && !(dt_list[j] < dt_list[j - 1])) {
            throw std::invalid_argument("refine_check: dt_list must be decreasing");
        }
        const TimeGrid grid = TimeGrid::with_max_step(horizon, dt_list[j]);
        const Path theta = generator(grid);
        const TrackerRun run = track_shares(theta, cfg);
        RefinementRow row{grid.dt(), grid.n_steps(), run.turnover.terminal(), 0.0};
        if (!rows.empty()) row.cauchy_diff = std::fabs(row.turnover - rows.back().turnover);
        rows.push_back(row);
    }
    return rows;
}

void write_ledger_csv(std::ostream& os, const TrackerRun& run) {
    os << "t,asset,trade,position,target,turnover\n";
    const auto& grid = run.theta.grid();
    for (std::size_t k = 0; k < run.theta.n_points(); ++k) {
        for (std::size_t i = 0; i < run.theta.dim(); ++i) {
            os << format_double(grid.time(k)) << ',' << i << ',' << format_double(run.trades(k, i)) << ','
               << format_double(run.position(k, i)) << ',' << format_double(run.theta(k, i)) << ','
               << format_double(run.turnover(k, 0)) << '\n';
        }
    }
}

}  // namespace bandtrack
