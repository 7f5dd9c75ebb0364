#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace bandtrack {

/// Exponential utility U(x) = -exp(-r x), the canonical member of the class
/// with bounded absolute risk aversion 0 < r_lo < -U''/U' < R_hi.
class ExponentialUtility {
public:
    explicit ExponentialUtility(double risk_aversion);

    double risk_aversion() const noexcept { return r_; }

    double value(double x) const noexcept { return -std::exp(-r_ * x); }
    double marginal(double x) const noexcept { return r_ * std::exp(-r_ * x); }
    double curvature(double x) const noexcept { return -r_ * r_ * std::exp(-r_ * x); }
    double absolute_risk_aversion(double x) const noexcept { return -curvature(x) / marginal(x); }

    /// Envelope e^{-R x + c} <= U'(x) <= e^{-r x + c} with c = ln U'(0).
    /// For the exponential utility both sides coincide with U' when r = R = r_.
    double marginal_lower_envelope(double x, double r_hi) const noexcept;
    double marginal_upper_envelope(double x, double r_lo) const noexcept;

private:
    double r_;
};

double evaluate_utility(const ExponentialUtility& u, double x);

struct FocResidual {
    double rms = 0.0;
    double rms_stderr = 0.0;
    double max_abs = 0.0;
    std::size_t n = 0;
};

/// Per-path residual U'(X_T) / mean U'(X_T) - dQ/dP.
FocResidual foc_residual(std::span<const double> terminal_wealth,
                         std::span<const double> density, const ExponentialUtility& u);

struct LossEstimate {
    double loss = 0.0;  ///< E U(X^theta_T) - E U(X^{vartheta,eps}_T)
    double stderr = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
};

/// Paired-difference estimate; samples must come from common random numbers.
LossEstimate utility_loss(std::span<const double> frictional_terminal,
                          std::span<const double> frictionless_terminal,
                          const ExponentialUtility& u);

}  // namespace bandtrack
