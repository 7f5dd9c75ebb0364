#pragma once

#include <cstddef>
#include <vector>

#include "bandtrack/paths.hpp"

namespace bandtrack {

struct KimOmbergModel;

/// Riccati solution blew up during backward integration.
class RiccatiBlowUp : public NumericalAbort {
public:
    RiccatiBlowUp(const std::string& what, double time) : NumericalAbort(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Coefficients of the exponential-utility value function in the arithmetic
/// Kim-Omberg market,
///
///   V(t, x, mu) = -exp(-r x + A(t) + B(t) mu + C(t) mu^2 / 2),
///
/// with A(T) = B(T) = C(T) = 0. With L(C) = 1/sigma_S + rho sigma_mu C,
///
///   C' = L(C)^2 + 2 lambda C - sigma_mu^2 C^2
///   B' = (rho sigma_mu L(C) + lambda - sigma_mu^2 C) B - lambda mu_bar C
///   A' = (rho^2 - 1) sigma_mu^2 B^2 / 2 - lambda mu_bar B - sigma_mu^2 C / 2
///
/// The table stores A, B, C on a uniform grid and interpolates linearly.
class RiccatiTable {
public:
    RiccatiTable(double horizon, std::vector<double> a, std::vector<double> b,
                 std::vector<double> c, double sigma_s, double lambda_rev, double mu_bar,
                 double sigma_mu, double rho);

    double horizon() const noexcept { return horizon_; }
    std::size_t n_steps() const noexcept { return b_.size() - 1; }
    double node_time(std::size_t k) const noexcept;

    const std::vector<double>& a_values() const noexcept { return a_; }
    const std::vector<double>& b_values() const noexcept { return b_; }
    const std::vector<double>& c_values() const noexcept { return c_; }

    double a(double t) const;
    double b(double t) const;
    double c(double t) const;

    /// (B'(t), C'(t)) from the ODE right-hand side at the interpolated values.
    std::pair<double, double> derivatives(double t) const;

private:
    double interpolate(const std::vector<double>& v, double t) const;

    double horizon_;
    std::vector<double> a_, b_, c_;
    double sigma_s_, lambda_rev_, mu_bar_, sigma_mu_, rho_;
};

struct RiccatiRhs {
    double sigma_s, lambda_rev, mu_bar, sigma_mu, rho;

    double dc(double c) const noexcept;
    double db(double b, double c) const noexcept;
    double da(double b, double c) const noexcept;
};

/// Classical RK4 backward from the zero terminal condition on n_steps
/// uniform steps. Throws RiccatiBlowUp when |B| or |C| exceeds 1e12.
RiccatiTable riccati_solve(const KimOmbergModel& model);
RiccatiTable riccati_solve(const KimOmbergModel& model, std::size_t n_steps);

}  // namespace bandtrack
