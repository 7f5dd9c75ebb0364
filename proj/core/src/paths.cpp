#include "bandtrack/paths.hpp"

#include <algorithm>
#include <sstream>

namespace bandtrack {

TimeGrid::TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (n_steps == 0) {
        throw std::invalid_argument("time grid needs at least one step");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("time horizon must be positive and finite");
    }
}

TimeGrid TimeGrid::with_max_step(double horizon, double max_dt) {
    if (!(max_dt > 0.0)) {
        throw std::invalid_argument("maximum step must be positive");
    }
    // Guard against ceil(1/0.01) = 101 style rounding.
    const double ratio = horizon / max_dt;
    auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
    return TimeGrid(horizon, std::max<std::size_t>(n, 1));
}

Path::Path(TimeGrid grid, Matrix values) : grid_(grid), values_(std::move(values)) {
    if (values_.rows() != grid_.n_points()) {
        throw std::invalid_argument("path values must have n_steps + 1 rows");
    }
}

std::vector<double> Path::component(std::size_t i) const {
    std::vector<double> out(n_points());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = values_(k, i);
    return out;
}

bool Path::all_finite() const noexcept {
    return std::all_of(values_.data().begin(), values_.data().end(),
                       [](double v) { return std::isfinite(v); });
}

Matrix brownian_increments(const SeedSpec& seed, const TimeGrid& grid, std::size_t dim) {
    if (dim == 0) {
        throw std::invalid_argument("brownian_increments: dimension must be at least 1");
    }
    IncrementStream stream(seed, grid, dim);
    Matrix out(grid.n_steps(), dim);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        for (std::size_t i = 0; i < dim; ++i) out(k, i) = stream(k, i);
    }
    return out;
}

Path integrate_sde(std::span<const double> x0, const DriftFn& drift, const DiffusionFn& diffusion,
                   const Matrix& increments, const TimeGrid& grid) {
    if (increments.rows() != grid.n_steps()) {
        throw std::invalid_argument("integrate_sde: increments do not match the grid");
    }
    const std::size_t d = x0.size();
    const double dt = grid.dt();
    Path path(grid, d);
    std::copy(x0.begin(), x0.end(), path.row(0).begin());
    std::vector<double> b(d), s(d);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double t = grid.time(k);
        auto x = path.row(k);
        std::fill(b.begin(), b.end(), 0.0);
        std::fill(s.begin(), s.end(), 0.0);
        drift(t, x, b);
        diffusion(t, x, increments.row(k), s);
        auto next = path.row(k + 1);
        for (std::size_t i = 0; i < d; ++i) {
            next[i] = x[i] + b[i] * dt + s[i];
            if (!std::isfinite(next[i])) {
                std::ostringstream msg;
                msg << "integrate_sde: non-finite state in component " << i << " at step " << k + 1
                    << " (t=" << grid.time(k + 1) << ")";
                throw NumericalAbort(msg.str());
            }
        }
    }
    return path;
}

namespace {

void require_same_grid(const Path& a, const Path& b, const char* what) {
    if (!(a.grid() == b.grid())) {
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
    }
    if (a.dim() != b.dim()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
    }
}

}  // namespace

Path stochastic_integral(const Path& integrand, const Path& integrator) {
    require_same_grid(integrand, integrator, "stochastic_integral");
    Path out(integrand.grid(), 1);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < integrand.n_points(); ++k) {
        for (std::size_t i = 0; i < integrand.dim(); ++i) {
            acc += integrand(k, i) * (integrator(k + 1, i) - integrator(k, i));
        }
        out(k + 1, 0) = acc;
    }
    return out;
}

Path quadratic_variation(const Path& p) { return quadratic_covariation(p, p); }

Path quadratic_covariation(const Path& a, const Path& b) {
    require_same_grid(a, b, "quadratic_covariation");
    Path out(a.grid(), 1);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < a.n_points(); ++k) {
        for (std::size_t i = 0; i < a.dim(); ++i) {
            acc += (a(k + 1, i) - a(k, i)) * (b(k + 1, i) - b(k, i));
        }
        out(k + 1, 0) = acc;
    }
    return out;
}

}  // namespace bandtrack
