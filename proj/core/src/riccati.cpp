#include "bandtrack/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bandtrack/models.hpp"

namespace bandtrack {

// With h(t, mu) = A + B mu + C mu^2 / 2, the HJB equation for
// V = -exp(-r x + h) is
//
//   h_t - (mu/sigma + rho sigma_mu h_mu)^2 / 2 + lambda (mu_bar - mu) h_mu
//       + sigma_mu^2 (h_mu^2 + h_mumu) / 2 = 0,
//
// and matching powers of mu gives the three equations below.
double RiccatiRhs::dc(double c) const noexcept {
    const double lead = 1.0 / sigma_s + rho * sigma_mu * c;
    return lead * lead + 2.0 * lambda_rev * c - sigma_mu * sigma_mu * c * c;
}

double RiccatiRhs::db(double b, double c) const noexcept {
    const double lead = 1.0 / sigma_s + rho * sigma_mu * c;
    return lead * rho * sigma_mu * b + lambda_rev * b - lambda_rev * mu_bar * c -
           sigma_mu * sigma_mu * b * c;
}

double RiccatiRhs::da(double b, double c) const noexcept {
    const double s2 = sigma_mu * sigma_mu;
    return 0.5 * rho * rho * s2 * b * b - lambda_rev * mu_bar * b - 0.5 * s2 * (b * b + c);
}

RiccatiTable::RiccatiTable(double horizon, std::vector<double> a, std::vector<double> b,
                           std::vector<double> c, double sigma_s, double lambda_rev,
                           double mu_bar, double sigma_mu, double rho)
    : horizon_(horizon),
      a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)),
      sigma_s_(sigma_s),
      lambda_rev_(lambda_rev),
      mu_bar_(mu_bar),
      sigma_mu_(sigma_mu),
      rho_(rho) {
    if (b_.size() < 2 || a_.size() != b_.size() || c_.size() != b_.size()) {
        throw std::invalid_argument("RiccatiTable: inconsistent table sizes");
    }
}

double RiccatiTable::node_time(std::size_t k) const noexcept {
    return k == n_steps() ? horizon_ : horizon_ * static_cast<double>(k) / static_cast<double>(n_steps());
}

double RiccatiTable::interpolate(const std::vector<double>& v, double t) const {
    if (!(t >= 0.0 && t <= horizon_)) {
        std::ostringstream msg;
        msg << "Riccati table queried at t=" << t << " outside [0, " << horizon_ << "]";
        throw std::out_of_range(msg.str());
    }
    const double pos = t / horizon_ * static_cast<double>(n_steps());
    const auto k = std::min(static_cast<std::size_t>(pos), n_steps() - 1);
    const double w = pos - static_cast<double>(k);
    return (1.0 - w) * v[k] + w * v[k + 1];
}

double RiccatiTable::a(double t) const { return interpolate(a_, t); }
double RiccatiTable::b(double t) const { return interpolate(b_, t); }
double RiccatiTable::c(double t) const { return interpolate(c_, t); }

std::pair<double, double> RiccatiTable::derivatives(double t) const {
    const RiccatiRhs rhs{sigma_s_, lambda_rev_, mu_bar_, sigma_mu_, rho_};
    const double bt = b(t);
    const double ct = c(t);
    return {rhs.db(bt, ct), rhs.dc(ct)};
}

RiccatiTable riccati_solve(const KimOmbergModel& model) {
    const auto n = static_cast<std::size_t>(std::ceil(model.horizon / model.riccati_step - 1e-9));
    return riccati_solve(model, std::max<std::size_t>(n, 1));
}

RiccatiTable riccati_solve(const KimOmbergModel& model, std::size_t n_steps) {
    model.validate();
    if (n_steps == 0) {
        throw std::invalid_argument("riccati_solve: grid needs at least one step");
    }
    const RiccatiRhs f{model.sigma_s, model.lambda_rev, model.mu_bar, model.sigma_mu, model.rho};
    std::vector<double> a(n_steps + 1, 0.0), b(n_steps + 1, 0.0), c(n_steps + 1, 0.0);

    // Integrate in time-to-maturity s = T - t, so y' = -f.
    const double h = model.horizon / static_cast<double>(n_steps);
    struct State {
        double a, b, c;
    };
    auto rate = [&](const State& y) {
        return State{-f.da(y.b, y.c), -f.db(y.b, y.c), -f.dc(y.c)};
    };
    State y{0.0, 0.0, 0.0};
    for (std::size_t j = n_steps; j-- > 0;) {
        const State k1 = rate(y);
        const State k2 = rate({y.a + 0.5 * h * k1.a, y.b + 0.5 * h * k1.b, y.c + 0.5 * h * k1.c});
        const State k3 = rate({y.a + 0.5 * h * k2.a, y.b + 0.5 * h * k2.b, y.c + 0.5 * h * k2.c});
        const State k4 = rate({y.a + h * k3.a, y.b + h * k3.b, y.c + h * k3.c});
        y.a += h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
        y.b += h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
        y.c += h / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
        if (!std::isfinite(y.b) || !std::isfinite(y.c) || std::fabs(y.b) > 1e12 ||
            std::fabs(y.c) > 1e12) {
            const double t = model.horizon * static_cast<double>(j) / static_cast<double>(n_steps);
            std::ostringstream msg;
            msg << "Riccati solution explodes at t=" << t;
            throw RiccatiBlowUp(msg.str(), t);
        }
        a[j] = y.a;
        b[j] = y.b;
        c[j] = y.c;
    }
    return RiccatiTable(model.horizon, std::move(a), std::move(b), std::move(c), model.sigma_s,
                        model.lambda_rev, model.mu_bar, model.sigma_mu, model.rho);
}

}  // namespace bandtrack
