#include "bandtrack/bounds.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "bandtrack/csv.hpp"

namespace bandtrack {

double discretization_tolerance(double dt, double terminal_qv, double delta) {
    return kDiscretizationSlack * std::sqrt(dt) * (1.0 + terminal_qv) / delta;
}

namespace {

void require_unit_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("bound evaluation needs delta in (0, 1)");
    }
}

void require_same_grid(const Path& a, const Path& b, const char* what) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

BoundReport finish_report(Path quantity, Path bound, Path xi, double identity_residual,
                          double tolerance) {
    const auto& grid = quantity.grid();
    Path slack(grid, 1);
    double slack_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < quantity.n_points(); ++k) {
        slack(k, 0) = bound(k, 0) - quantity(k, 0);
        slack_min = std::min(slack_min, slack(k, 0));
    }
    return BoundReport{std::move(quantity), std::move(bound),   std::move(slack), std::move(xi),
                       slack_min,           identity_residual, tolerance};
}

}  // namespace

Path wealth_frictionless(const Path& theta, const Path& price, double x0, TrackingMode mode) {
    require_same_grid(theta, price, "wealth_frictionless");
    if (theta.dim() != price.dim()) {
        throw std::invalid_argument("wealth_frictionless: dimension mismatch");
    }
    Path wealth(theta.grid(), 1);
    double x = x0;
    wealth(0, 0) = x;
    for (std::size_t k = 0; k + 1 < theta.n_points(); ++k) {
        for (std::size_t i = 0; i < theta.dim(); ++i) {
            const double ds = price(k + 1, i) - price(k, i);
            const double holding =
                mode == TrackingMode::shares ? theta(k, i) : theta(k, i) / price(k, i);
            x += holding * ds;
        }
        wealth(k + 1, 0) = x;
    }
    return wealth;
}

Path wealth_frictional(const TrackerRun& run, const Path& price, double x0, const CostSpec& cost) {
    if (run.mode != cost.mode) {
        throw std::invalid_argument("wealth_frictional: tracker and cost modes differ");
    }
    require_same_grid(run.position, price, "wealth_frictional");
    const auto& grid = price.grid();
    Path wealth(grid, 1);
    double gains = 0.0;
    const std::size_t last = grid.n_steps();
    for (std::size_t k = 0; k <= last; ++k) {
        if (k > 0) {
            for (std::size_t i = 0; i < price.dim(); ++i) {
                const double ds = price(k, i) - price(k - 1, i);
                const double holding = run.mode == TrackingMode::shares
                                           ? run.position(k - 1, i)
                                           : run.position(k - 1, i) / price(k - 1, i);
                gains += holding * ds;
            }
        }
        double x = x0 + gains - cost.epsilon * run.turnover(k, 0);
        if (k == last) x -= cost.epsilon * run.terminal_liquidation;
        wealth(k, 0) = x;
    }
    return wealth;
}

BoundReport turnover_bound(const Path& theta, const TrackerRun& run, double delta) {
    require_unit_delta(delta);
    require_same_grid(theta, run.position, "turnover_bound");
    const auto& grid = theta.grid();
    const std::size_t d = theta.dim();

    std::vector<LemmaAccumulator> acc(d, LemmaAccumulator(delta));
    for (std::size_t i = 0; i < d; ++i) acc[i].start(run.xi_realized(0, i));

    Path quantity(grid, 1), bound(grid, 1), xi(grid, d);
    double residual = 0.0;
    for (std::size_t k = 0; k < theta.n_points(); ++k) {
        if (k > 0) {
            for (std::size_t i = 0; i < d; ++i) {
                acc[i].step(theta(k, i) - theta(k - 1, i), run.xi_realized(k, i));
            }
        }
        double r = 0.0;
        double identity = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            r += acc[i].bound();
            identity += acc[i].identity_value();
            xi(k, i) = acc[i].xi();
        }
        quantity(k, 0) = run.turnover(k, 0) - run.initial_jump;
        bound(k, 0) = r;
        residual = std::max(residual, std::fabs(quantity(k, 0) - identity));
    }
    double qv = 0.0;
    for (const auto& a : acc) qv += a.quadratic_variation();
    return finish_report(std::move(quantity), std::move(bound), std::move(xi), residual,
                         discretization_tolerance(grid.dt(), qv, delta));
}

BoundReport tracking_bound(const TrackerRun& run, const Path& price, const CostSpec& cost,
                           const Path& x_frictional, const Path& x_frictionless) {
    if (run.mode != TrackingMode::shares || cost.mode != TrackingMode::shares) {
        throw std::invalid_argument("tracking_bound is defined for shares-mode runs");
    }
    require_same_grid(run.position, price, "tracking_bound");
    require_same_grid(x_frictional, price, "tracking_bound");
    require_same_grid(x_frictionless, price, "tracking_bound");
    const BoundReport lemma = turnover_bound(run.theta, run, run.delta);
    const auto& grid = price.grid();
    const std::size_t d = price.dim();

    Path quantity(grid, 1), bound(grid, 1), xi(grid, d);
    double xi_ds = 0.0;
    for (std::size_t k = 0; k < price.n_points(); ++k) {
        if (k > 0) {
            for (std::size_t i = 0; i < d; ++i) {
                xi_ds += xi(k - 1, i) * (price(k, i) - price(k - 1, i));
            }
        }
        for (std::size_t i = 0; i < d; ++i) {
            xi(k, i) = (run.position(k, i) - run.theta(k, i)) / run.delta;
        }
        quantity(k, 0) = std::fabs(x_frictional(k, 0) - x_frictionless(k, 0));
        bound(k, 0) = run.delta * std::fabs(xi_ds) +
                      2.0 * cost.epsilon * (lemma.bound(k, 0) + run.initial_jump);
    }
    return finish_report(std::move(quantity), std::move(bound), std::move(xi), 0.0,
                         2.0 * cost.epsilon * lemma.tolerance);
}

Path cumulative_returns(const Path& price) {
    Path m(price.grid(), price.dim());
    for (std::size_t k = 0; k + 1 < price.n_points(); ++k) {
        for (std::size_t i = 0; i < price.dim(); ++i) {
            if (!(price(k, i) > 0.0)) {
                throw NumericalAbort("cumulative_returns: nonpositive price at step " +
                                     std::to_string(k));
            }
            m(k + 1, i) = m(k, i) + (price(k + 1, i) - price(k, i)) / price(k, i);
        }
    }
    return m;
}

BoundReport monetary_turnover_bound(const TrackerRun& run, const Path& returns, const Path& theta,
                                    double delta) {
    if (run.mode != TrackingMode::monetary) {
        throw std::invalid_argument("monetary_turnover_bound needs a monetary-mode run");
    }
    require_unit_delta(delta);
    require_same_grid(theta, returns, "monetary_turnover_bound");
    require_same_grid(theta, run.position, "monetary_turnover_bound");
    const auto& grid = theta.grid();
    const std::size_t d = theta.dim();

    std::vector<MonetaryBoundAccumulator> acc(d, MonetaryBoundAccumulator(delta));
    for (std::size_t i = 0; i < d; ++i) acc[i].start(run.xi_realized(0, i), theta(0, i));

    Path quantity(grid, 1), bound(grid, 1), xi(grid, d);
    double residual = 0.0;
    for (std::size_t k = 0; k < theta.n_points(); ++k) {
        if (k > 0) {
            for (std::size_t i = 0; i < d; ++i) {
                acc[i].step(theta(k, i) - theta(k - 1, i), returns(k, i) - returns(k - 1, i),
                            run.xi_realized(k, i), theta(k, i));
            }
        }
        double b = 0.0;
        double identity = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            b += acc[i].bound();
            identity += acc[i].identity_value();
            xi(k, i) = std::clamp(run.xi_realized(k, i), -1.0, 1.0);
        }
        quantity(k, 0) = run.turnover(k, 0) - run.initial_jump;
        bound(k, 0) = b;
        residual = std::max(residual, std::fabs(quantity(k, 0) - identity));
    }
    double qv = 0.0;
    for (const auto& a : acc) qv += a.target_quadratic_variation();
    return finish_report(std::move(quantity), std::move(bound), std::move(xi), residual,
                         discretization_tolerance(grid.dt(), qv, delta));
}

void write_bound_csv(std::ostream& os, std::size_t path_id, const BoundReport& report, bool header,
                     std::size_t stride) {
    if (header) os << "path_id,t,lhs,rhs,slack\n";
    const auto& grid = report.quantity.grid();
    const std::size_t n = report.quantity.n_points();
    stride = std::max<std::size_t>(stride, 1);
    auto emit = [&](std::size_t k) {
        os << path_id << ',' << format_double(grid.time(k)) << ','
           << format_double(report.quantity(k, 0)) << ',' << format_double(report.bound(k, 0))
           << ',' << format_double(report.slack(k, 0)) << '\n';
    };
    for (std::size_t k = 0; k < n; k += stride) emit(k);
    if ((n - 1) % stride != 0) emit(n - 1);
}

}  // namespace bandtrack
