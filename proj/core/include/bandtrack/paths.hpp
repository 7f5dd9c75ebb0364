#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandtrack/rng.hpp"

namespace bandtrack {

/// Raised when a simulated state stops being finite or a solver diverges.
class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform grid 0 = t_0 < t_1 < ... < t_n = T.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps);

    /// Smallest uniform grid on [0,T] whose step does not exceed max_dt.
    static TimeGrid with_max_step(double horizon, double max_dt);

    double horizon() const noexcept { return horizon_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_points() const noexcept { return n_steps_ + 1; }
    double dt() const noexcept { return horizon_ / static_cast<double>(n_steps_); }
    double time(std::size_t k) const noexcept {
        return k == n_steps_ ? horizon_ : static_cast<double>(k) * dt();
    }

    bool operator==(const TimeGrid&) const = default;

private:
    double horizon_;
    std::size_t n_steps_;
};

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// A d-dimensional process sampled on a TimeGrid; values has n_steps+1 rows.
class Path {
public:
    Path(TimeGrid grid, std::size_t dim, double fill = 0.0)
        : grid_(grid), values_(grid.n_points(), dim, fill) {}
    Path(TimeGrid grid, Matrix values);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return values_.cols(); }
    std::size_t n_points() const noexcept { return values_.rows(); }

    double operator()(std::size_t k, std::size_t i) const noexcept { return values_(k, i); }
    double& operator()(std::size_t k, std::size_t i) noexcept { return values_(k, i); }
    std::span<const double> row(std::size_t k) const noexcept { return values_.row(k); }
    std::span<double> row(std::size_t k) noexcept { return values_.row(k); }

    double terminal(std::size_t i = 0) const noexcept { return values_(values_.rows() - 1, i); }
    std::vector<double> component(std::size_t i) const;
    const Matrix& values() const noexcept { return values_; }

    bool all_finite() const noexcept;

private:
    TimeGrid grid_;
    Matrix values_;
};

/// Gaussian increments N(0, dt) for one path, addressed by (step, component).
class IncrementStream {
public:
    IncrementStream(const SeedSpec& seed, const TimeGrid& grid, std::size_t dim) noexcept
        : rng_(seed.master_seed, seed.path_index), dim_(dim), sqrt_dt_(std::sqrt(grid.dt())) {}

    double operator()(std::size_t step, std::size_t component) const noexcept {
        return sqrt_dt_ * rng_.normal(static_cast<std::uint64_t>(step) * dim_ + component);
    }

    std::size_t dim() const noexcept { return dim_; }

private:
    CounterRng rng_;
    std::size_t dim_;
    double sqrt_dt_;
};

/// n_steps x dim matrix of i.i.d. N(0, dt) draws.
Matrix brownian_increments(const SeedSpec& seed, const TimeGrid& grid, std::size_t dim);

using DriftFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
/// Writes the diffusion contribution sigma(t,x) dW into out.
using DiffusionFn = std::function<void(double t, std::span<const double> x,
                                       std::span<const double> dw, std::span<double> out)>;

/// Euler-Maruyama: X_{k+1} = X_k + b(t_k,X_k) dt + sigma(t_k,X_k) dW_k.
Path integrate_sde(std::span<const double> x0, const DriftFn& drift, const DiffusionFn& diffusion,
                   const Matrix& increments, const TimeGrid& grid);

/// Left-point sum I_{k+1} = I_k + sum_i h[k,i] (X[k+1,i] - X[k,i]); one column.
Path stochastic_integral(const Path& integrand, const Path& integrator);

/// Realized quadratic variation summed over components; one column.
Path quadratic_variation(const Path& p);

/// Realized covariation sum_i sum_k dA[k,i] dB[k,i]; one column.
Path quadratic_covariation(const Path& a, const Path& b);

}  // namespace bandtrack
