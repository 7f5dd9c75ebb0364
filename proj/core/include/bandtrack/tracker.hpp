#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bandtrack/paths.hpp"

namespace bandtrack {

enum class TrackingMode { shares, monetary };

std::string to_string(TrackingMode m);

struct BandConfig {
    double delta = 0.1;
    TrackingMode mode = TrackingMode::shares;
};

/// One component of the discrete Skorokhod problem: the position is only
/// moved when the target leaves [position - delta, position + delta], and then
/// just far enough to put it back on the band edge.
class BandReflector {
public:
    explicit BandReflector(double delta) : delta_(delta) {}

    /// Time-0 trade from the pre-trade position (0 unless stated otherwise).
    double start(double target, double initial_position = 0.0) noexcept {
        position_ = initial_position;
        turnover_ = 0.0;
        const double trade = reflect(target);
        initial_jump_ = std::fabs(trade);
        return trade;
    }

    /// Monetary positions drift with the asset between trades.
    void grow(double factor) noexcept { position_ *= factor; }

    /// Returns the signed trade.
    double reflect(double target) noexcept {
        const double gap = target - position_;
        double trade = 0.0;
        if (gap > delta_) {
            trade = gap - delta_;
            position_ = target - delta_;
        } else if (gap < -delta_) {
            trade = gap + delta_;
            position_ = target + delta_;
        }
        turnover_ += std::fabs(trade);
        return trade;
    }

    double delta() const noexcept { return delta_; }
    double position() const noexcept { return position_; }
    double turnover() const noexcept { return turnover_; }
    double initial_jump() const noexcept { return initial_jump_; }
    /// Z = (target - position) / delta, in [-1, 1] after a reflection.
    double deviation(double target) const noexcept { return (target - position_) / delta_; }

private:
    double delta_;
    double position_ = 0.0;
    double turnover_ = 0.0;
    double initial_jump_ = 0.0;
};

struct TrackerRun {
    TrackingMode mode = TrackingMode::shares;
    double delta = 0.0;
    Path theta;        ///< target
    Path vartheta;     ///< shares held, or cumulative money transferred (monetary)
    Path position;     ///< shares held, or money invested Y (monetary)
    Path trades;       ///< signed trade executed at each grid point
    Path turnover;     ///< |vartheta|_t summed over assets, one column
    Path xi_realized;  ///< (theta - position) / delta
    double initial_jump = 0.0;          ///< summed |time-0 trade|, included in turnover
    double terminal_liquidation = 0.0;  ///< sum_i |position_T^i|
};

TrackerRun track_shares(const Path& theta, const BandConfig& cfg);

/// Between grid points the money position drifts, Y <- Y (1 + dS/S); then the
/// minimal transfer restores |theta - Y| <= delta.
TrackerRun track_monetary(const Path& theta, const Path& price, const BandConfig& cfg);

struct RefinementRow {
    double dt = 0.0;
    std::size_t n_steps = 0;
    double turnover = 0.0;
    double cauchy_diff = 0.0;  ///< |turnover - previous row's turnover|; 0 on the first row
};

using TargetGenerator = std::function<Path(const TimeGrid&)>;

/// Terminal turnover of track_shares for each step size in dt_list (decreasing).
std::vector<RefinementRow> refine_check(const TargetGenerator& generator, double horizon,
                                        const BandConfig& cfg, std::span<const double> dt_list);

/// Trade ledger as CSV rows (t, asset, trade, position, target, turnover).
void write_ledger_csv(std::ostream& os, const TrackerRun& run);

}  // namespace bandtrack
