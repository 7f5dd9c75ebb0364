#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iosfwd>

#include "bandtrack/paths.hpp"
#include "bandtrack/tracker.hpp"

namespace bandtrack {

struct CostSpec {
    double epsilon = 1e-3;
    TrackingMode mode = TrackingMode::shares;
};

/// Constant K of the discretization allowance K sqrt(dt) (1 + <theta>_T) / delta
/// granted to pathwise bounds that hold exactly only in continuous time.
inline constexpr double kDiscretizationSlack = 1.0;

double discretization_tolerance(double dt, double terminal_qv, double delta);

/// Per-component bookkeeping for |vartheta| <= 2 delta + int xi dtheta + <theta>/(2 delta)
/// with xi = phi'(Z), phi(z) = z^2 / 2 and Z = (theta - position) / delta taken
/// at the left end of each step.
class LemmaAccumulator {
public:
    explicit LemmaAccumulator(double delta) : delta_(delta) {}

    void start(double z0) noexcept {
        z0_ = z0;
        z_ = z0;
        xi_dtheta_ = 0.0;
        qv_ = 0.0;
    }

    void step(double dtheta, double z_next) noexcept {
        xi_dtheta_ += xi() * dtheta;
        qv_ += dtheta * dtheta;
        z_ = z_next;
    }

    /// Current integrand phi'(Z) = Z clipped to [-1, 1].
    double xi() const noexcept { return std::clamp(z_, -1.0, 1.0); }
    double integral() const noexcept { return xi_dtheta_; }
    double quadratic_variation() const noexcept { return qv_; }

    double bound() const noexcept { return 2.0 * delta_ + xi_dtheta_ + qv_ / (2.0 * delta_); }

    /// delta (phi(Z_0) - phi(Z_t)) + int phi'(Z) dtheta + int phi''(Z) d<theta> / (2 delta),
    /// which equals the turnover on (0, t] in continuous time.
    double identity_value() const noexcept {
        return 0.5 * delta_ * (z0_ * z0_ - z_ * z_) + xi_dtheta_ + qv_ / (2.0 * delta_);
    }

private:
    double delta_;
    double z0_ = 0.0;
    double z_ = 0.0;
    double xi_dtheta_ = 0.0;
    double qv_ = 0.0;
};

/// Per-component bookkeeping for the monetary turnover bound, with M the
/// cumulative return. Terms are grouped by their order in delta:
///   delta (2 + int xi1 dM + <M>/2)
///   + int xi2 dtheta + int xi3 theta dM + int xi4 theta d<M> + int xi5 d<M,theta>
///   + (<theta>/2 + int theta^2 d<M>/2 + int xi6 theta d<M,theta>) / delta
/// with xi1 = Z^2, xi2 = xi5 = Z, xi3 = xi4 = -Z, xi6 = -1.
class MonetaryBoundAccumulator {
public:
    explicit MonetaryBoundAccumulator(double delta) : delta_(delta) {}

    void start(double z0, double theta0) noexcept {
        *this = MonetaryBoundAccumulator(delta_);
        z0_ = z0;
        z_ = z0;
        theta_ = theta0;
    }

    void step(double dtheta, double dm, double z_next, double theta_next) noexcept {
        const double z = std::clamp(z_, -1.0, 1.0);
        const double dm2 = dm * dm;
        xi1_dm_ += z * z * dm;
        qv_m_ += dm2;
        xi2_dtheta_ += z * dtheta;
        xi3_theta_dm_ += -z * theta_ * dm;
        xi4_theta_dqm_ += -z * theta_ * dm2;
        xi5_dcov_ += z * dtheta * dm;
        qv_theta_ += dtheta * dtheta;
        theta2_dqm_ += theta_ * theta_ * dm2;
        xi6_theta_dcov_ += -theta_ * dtheta * dm;
        // Exact one-step identity with D = dtheta - Y dM and Y = theta - delta Z.
        const double y = theta_ - delta_ * z_;
        const double d = dtheta - y * dm;
        identity_sum_ += z_ * d + d * d / (2.0 * delta_);
        z_ = z_next;
        theta_ = theta_next;
    }

    double delta_group() const noexcept { return delta_ * (2.0 + xi1_dm_ + 0.5 * qv_m_); }
    double unit_group() const noexcept {
        return xi2_dtheta_ + xi3_theta_dm_ + xi4_theta_dqm_ + xi5_dcov_;
    }
    double inverse_group() const noexcept {
        return (0.5 * qv_theta_ + 0.5 * theta2_dqm_ + xi6_theta_dcov_) / delta_;
    }
    double bound() const noexcept { return delta_group() + unit_group() + inverse_group(); }
    double identity_value() const noexcept {
        return 0.5 * delta_ * (z0_ * z0_ - z_ * z_) + identity_sum_;
    }
    double target_quadratic_variation() const noexcept { return qv_theta_; }

private:
    double delta_;
    double z0_ = 0.0, z_ = 0.0, theta_ = 0.0;
    double xi1_dm_ = 0.0, qv_m_ = 0.0;
    double xi2_dtheta_ = 0.0, xi3_theta_dm_ = 0.0, xi4_theta_dqm_ = 0.0, xi5_dcov_ = 0.0;
    double qv_theta_ = 0.0, theta2_dqm_ = 0.0, xi6_theta_dcov_ = 0.0;
    double identity_sum_ = 0.0;
};

/// quantity_t <= bound_t checked on the grid. slack = bound - quantity.
struct BoundReport {
    Path quantity;
    Path bound;
    Path slack;
    Path xi_used;
    double slack_min = 0.0;
    double identity_residual = 0.0;  ///< max_t |quantity - identity value|; 0 where not defined
    double tolerance = 0.0;

    bool holds() const noexcept { return slack_min >= -tolerance; }
};

/// X0 + int theta dS (shares) or X0 + int (theta / S) dS (monetary).
Path wealth_frictionless(const Path& theta, const Path& price, double x0,
                         TrackingMode mode = TrackingMode::shares);

/// Frictional wealth including the liquidation charge at T.
Path wealth_frictional(const TrackerRun& run, const Path& price, double x0, const CostSpec& cost);

/// Turnover on (0, t] against 2 d delta + int xi dtheta + <theta>_t / (2 delta).
/// The time-0 trade from the zero initial position is excluded on both sides.
BoundReport turnover_bound(const Path& theta, const TrackerRun& run, double delta);

/// |X^{vartheta,eps} - X^theta| against delta |int xi dS| + 2 eps (R_delta(xi') + J)
/// where J is the time-0 trade (zero whenever |theta_0| <= delta).
BoundReport tracking_bound(const TrackerRun& run, const Path& price, const CostSpec& cost,
                           const Path& x_frictional, const Path& x_frictionless);

/// Monetary-mode turnover against the grouped bound of MonetaryBoundAccumulator.
/// `returns` is the cumulative return path M with dM = dS / S.
BoundReport monetary_turnover_bound(const TrackerRun& run, const Path& returns, const Path& theta,
                                    double delta);

/// Cumulative returns M_k = sum_{j<k} (S_{j+1} - S_j) / S_j.
Path cumulative_returns(const Path& price);

/// Rows (path_id, t, lhs, rhs, slack); header written when requested.
void write_bound_csv(std::ostream& os, std::size_t path_id, const BoundReport& report,
                     bool header = true, std::size_t stride = 1);

}  // namespace bandtrack
