#include "bandtrack/utility.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "bandtrack/estimator.hpp"

namespace bandtrack {

ExponentialUtility::ExponentialUtility(double risk_aversion) : r_(risk_aversion) {
    if (!(risk_aversion > 0.0) || !std::isfinite(risk_aversion)) {
        throw std::invalid_argument("risk aversion must be positive");
    }
}

double ExponentialUtility::marginal_lower_envelope(double x, double r_hi) const noexcept {
    return std::exp(-r_hi * x + std::log(marginal(0.0)));
}

double ExponentialUtility::marginal_upper_envelope(double x, double r_lo) const noexcept {
    return std::exp(-r_lo * x + std::log(marginal(0.0)));
}

double evaluate_utility(const ExponentialUtility& u, double x) { return u.value(x); }

FocResidual foc_residual(std::span<const double> terminal_wealth,
                         std::span<const double> density, const ExponentialUtility& u) {
    if (terminal_wealth.empty()) throw std::invalid_argument("foc_residual: no samples");
    if (terminal_wealth.size() != density.size()) {
        throw std::invalid_argument("foc_residual: wealth and density sample counts differ");
    }
    const std::size_t n = terminal_wealth.size();
    // U'(x_i) / mean U'(x) is unchanged by shifting every x_i by the same
    // constant, so normalize against the largest wealth to stay in range.
    const double shift = *std::max_element(terminal_wealth.begin(), terminal_wealth.end());
    std::vector<double> marginal(n);
    for (std::size_t i = 0; i < n; ++i) {
        marginal[i] = std::exp(-u.risk_aversion() * (terminal_wealth[i] - shift));
    }
    const double norm = pairwise_sum(marginal) / static_cast<double>(n);

    std::vector<double> squared(n);
    FocResidual out;
    out.n = n;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = marginal[i] / norm - density[i];
        squared[i] = r * r;
        out.max_abs = std::max(out.max_abs, std::fabs(r));
    }
    const auto ms = mean_and_stderr(squared);
    out.rms = std::sqrt(ms.mean);
    out.rms_stderr = out.rms > 0.0 ? ms.stderr / (2.0 * out.rms) : 0.0;
    return out;
}

LossEstimate utility_loss(std::span<const double> frictional_terminal,
                          std::span<const double> frictionless_terminal,
                          const ExponentialUtility& u) {
    if (frictional_terminal.size() != frictionless_terminal.size()) {
        throw std::invalid_argument("utility_loss: ensemble sizes differ");
    }
    if (frictional_terminal.empty()) throw std::invalid_argument("utility_loss: no samples");
    std::vector<double> diff(frictional_terminal.size());
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = u.value(frictionless_terminal[i]) - u.value(frictional_terminal[i]);
    }
    const auto ms = mean_and_stderr(diff);
    return LossEstimate{ms.mean, ms.stderr, ms.mean - 1.96 * ms.stderr,
                        ms.mean + 1.96 * ms.stderr, diff.size()};
}

}  // namespace bandtrack
