#include "bandtrack/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "bandtrack/estimator.hpp"

namespace bandtrack {

std::string to_string(Measure m) {
    return m == Measure::physical ? "physical" : "dual_martingale";
}

Measure parse_measure(const std::string& name) {
    if (name == "physical") return Measure::physical;
    if (name == "dual_martingale" || name == "dual") return Measure::dual_martingale;
    throw std::invalid_argument("unknown measure '" + name + "'");
}

std::string to_string(TargetKind k) {
    switch (k) {
        case TargetKind::merton: return "merton";
        case TargetKind::kim_omberg: return "kim_omberg";
        case TargetKind::pure_brownian: return "pure_brownian";
        case TargetKind::deterministic_ramp: return "deterministic_ramp";
        case TargetKind::deterministic_sine: return "deterministic_sine";
    }
    return "unknown";
}

TargetKind parse_target_kind(const std::string& name) {
    for (auto k : {TargetKind::merton, TargetKind::kim_omberg, TargetKind::pure_brownian,
                   TargetKind::deterministic_ramp, TargetKind::deterministic_sine}) {
        if (name == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown target kind '" + name + "'");
}

void ConstantModel::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("ConstantModel: sigma must be positive");
    }
    if (!std::isfinite(mu)) throw std::invalid_argument("ConstantModel: mu must be finite");
    if (!(risk_aversion > 0.0)) {
        throw std::invalid_argument("ConstantModel: risk aversion must be positive");
    }
    if (dynamics == PriceDynamics::geometric && !(s0 > 0.0)) {
        throw std::invalid_argument("ConstantModel: geometric prices need s0 > 0");
    }
}

void KimOmbergModel::validate() const {
    if (!(sigma_s > 0.0)) throw std::invalid_argument("KimOmbergModel: sigma_s must be positive");
    if (!(lambda_rev > 0.0)) {
        throw std::invalid_argument("KimOmbergModel: lambda_rev must be positive");
    }
    if (!(sigma_mu >= 0.0)) {
        throw std::invalid_argument("KimOmbergModel: sigma_mu must be nonnegative");
    }
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw std::invalid_argument("KimOmbergModel: rho must lie in [-1, 1]");
    }
    if (!(risk_aversion > 0.0)) {
        throw std::invalid_argument("KimOmbergModel: risk aversion must be positive");
    }
    if (!(horizon > 0.0) || !(riccati_step > 0.0)) {
        throw std::invalid_argument("KimOmbergModel: horizon and riccati_step must be positive");
    }
}

double merton_strategy(const ConstantModel& m) {
    m.validate();
    return m.mu / (m.risk_aversion * m.sigma * m.sigma);
}

double ko_strategy(const KimOmbergModel& m, const RiccatiTable& table, double t, double mu) {
    const double r = m.risk_aversion;
    const double myopic = mu / (r * m.sigma_s * m.sigma_s);
    const double hedge = m.rho * m.sigma_mu / (r * m.sigma_s);
    return myopic + hedge * (table.b(t) + table.c(t) * mu);
}

Path girsanov_density(const Path& lambda_path, const Matrix& wq_increments, const TimeGrid& grid) {
    if (!(lambda_path.grid() == grid)) {
        throw std::invalid_argument("girsanov_density: lambda path is on a different grid");
    }
    if (wq_increments.rows() != grid.n_steps() || wq_increments.cols() != lambda_path.dim()) {
        throw std::invalid_argument("girsanov_density: increments do not match lambda");
    }
    const double dt = grid.dt();
    Path density(grid, 1);
    double log_density = 0.0;
    density(0, 0) = 1.0;
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        for (std::size_t j = 0; j < lambda_path.dim(); ++j) {
            const double l = lambda_path(k, j);
            log_density += 0.5 * l * l * dt - l * wq_increments(k, j);
        }
        density(k + 1, 0) = std::exp(log_density);
    }
    return density;
}

// ---------------------------------------------------------------------------

ScenarioSimulator::ScenarioSimulator(MarketModel model, TargetSpec target, Measure measure,
                                     TimeGrid grid)
    : model_(std::move(model)), target_(target), measure_(measure), grid_(grid) {
    if (target_.dim == 0) throw std::invalid_argument("target dimension must be at least 1");
    if (const auto* cm = std::get_if<ConstantModel>(&model_)) {
        cm->validate();
        if (target_.kind == TargetKind::kim_omberg) {
            throw std::invalid_argument(
                "unsupported scenario: kim_omberg target needs a KimOmbergModel");
        }
        noise_dim_ = target_.kind == TargetKind::pure_brownian ? 2 * target_.dim : target_.dim;
        kernel_dim_ = target_.dim;
    } else {
        const auto& ko = std::get<KimOmbergModel>(model_);
        ko.validate();
        if (target_.kind != TargetKind::kim_omberg) {
            throw std::invalid_argument(
                "unsupported scenario: KimOmbergModel only drives a kim_omberg target");
        }
        if (target_.dim != 1) {
            throw std::invalid_argument("unsupported scenario: KimOmbergModel is one-dimensional");
        }
        if (std::fabs(ko.horizon - grid_.horizon()) > 1e-12 * ko.horizon) {
            throw std::invalid_argument("KimOmbergModel horizon differs from the time grid");
        }
        noise_dim_ = 2;
        kernel_dim_ = 2;
        riccati_ = std::make_shared<const RiccatiTable>(riccati_solve(ko));
    }
}

ScenarioSimulator::Stepper::Stepper(const ScenarioSimulator& sim, const SeedSpec& seed)
    : sim_(&sim), noise_(seed, sim.grid_, sim.noise_dim_) {
    const std::size_t d = sim.dim();
    price_.assign(d, 0.0);
    target_.assign(d, 0.0);
    price_drift_.assign(d, 0.0);
    price_vol_.assign(d, 0.0);
    target_drift_.assign(d, 0.0);
    target_vol_.assign(d, 0.0);
    lambda_.assign(sim.kernel_dim_, 0.0);
    dw_.assign(sim.noise_dim_, 0.0);

    const auto& spec = sim.target_;
    if (const auto* cm = std::get_if<ConstantModel>(&sim.model_)) {
        std::fill(price_.begin(), price_.end(), cm->s0);
        double theta0 = spec.initial;
        if (spec.kind == TargetKind::merton) theta0 = merton_strategy(*cm);
        std::fill(target_.begin(), target_.end(), theta0);
    } else {
        const auto& ko = std::get<KimOmbergModel>(sim.model_);
        price_[0] = ko.s0;
        mu_ = ko.mu0;
        target_[0] = ko_strategy(ko, *sim.riccati_, 0.0, mu_);
    }
    refresh_coefficients();
    // Arithmetic constant-coefficient markets with Brownian or constant
    // targets never change their coefficients.
    if (const auto* cm = std::get_if<ConstantModel>(&sim.model_)) {
        frozen_coefficients_ = cm->dynamics == PriceDynamics::arithmetic &&
                               (spec.kind == TargetKind::pure_brownian || spec.kind == TargetKind::merton);
    }
}

void ScenarioSimulator::Stepper::refresh_coefficients() {
    const auto& sim = *sim_;
    const auto& spec = sim.target_;
    const double t = time();
    const bool dual = sim.measure_ == Measure::dual_martingale;

    if (const auto* cm = std::get_if<ConstantModel>(&sim.model_)) {
        for (std::size_t i = 0; i < sim.dim(); ++i) {
            const double level = cm->dynamics == PriceDynamics::geometric ? price_[i] : 1.0;
            price_drift_[i] = dual ? 0.0 : cm->mu * level;
            price_vol_[i] = cm->sigma * level;
            lambda_[i] = cm->market_price_of_risk();
            switch (spec.kind) {
                case TargetKind::pure_brownian:
                    target_drift_[i] = 0.0;
                    target_vol_[i] = spec.scale;
                    break;
                case TargetKind::deterministic_ramp:
                    target_drift_[i] = spec.slope;
                    target_vol_[i] = 0.0;
                    break;
                case TargetKind::deterministic_sine:
                    target_drift_[i] = spec.amplitude * spec.frequency * std::cos(spec.frequency * t);
                    target_vol_[i] = 0.0;
                    break;
                default:
                    target_drift_[i] = 0.0;
                    target_vol_[i] = 0.0;
                    break;
            }
        }
        return;
    }

    const auto& ko = std::get<KimOmbergModel>(sim.model_);
    const auto& table = *sim.riccati_;
    const double r = ko.risk_aversion;
    const double perp = std::sqrt(std::max(0.0, 1.0 - ko.rho * ko.rho));
    const double bt = table.b(t);
    const double ct = table.c(t);
    const double phi = mu_ / ko.sigma_s;
    const double psi = -perp * ko.sigma_mu * (bt + ct * mu_);
    lambda_[0] = phi;
    lambda_[1] = psi;

    double mu_drift = ko.lambda_rev * (ko.mu_bar - mu_);
    if (dual) mu_drift += -ko.rho * ko.sigma_mu * phi - perp * ko.sigma_mu * psi;

    price_drift_[0] = dual ? 0.0 : mu_;
    price_vol_[0] = ko.sigma_s;

    const double hedge = ko.rho * ko.sigma_mu / (r * ko.sigma_s);
    const double sensitivity = 1.0 / (r * ko.sigma_s * ko.sigma_s) + hedge * ct;
    const auto [db, dc] = table.derivatives(t);
    target_drift_[0] = hedge * (db + dc * mu_) + sensitivity * mu_drift;
    target_vol_[0] = std::fabs(sensitivity) * ko.sigma_mu;
}

void ScenarioSimulator::Stepper::advance() {
    const auto& sim = *sim_;
    const auto& spec = sim.target_;
    const double dt = sim.grid_.dt();
    const bool dual = sim.measure_ == Measure::dual_martingale;
    const std::size_t k = step_;
    const double t_next = sim.grid_.time(k + 1);
    for (std::size_t j = 0; j < dw_.size(); ++j) dw_[j] = noise_(k, j);

    if (std::holds_alternative<ConstantModel>(sim.model_)) {
        const double lambda = lambda_[0];
        for (std::size_t i = 0; i < sim.dim(); ++i) {
            const double dw = dw_[i];
            price_[i] += price_drift_[i] * dt + price_vol_[i] * dw;
            const double dwq = dual ? dw : dw + lambda * dt;
            log_density_ += 0.5 * lambda * lambda * dt - lambda * dwq;
            switch (spec.kind) {
                case TargetKind::pure_brownian:
                    target_[i] += spec.scale * dw_[sim.dim() + i];
                    break;
                case TargetKind::deterministic_ramp:
                    target_[i] = spec.initial + spec.slope * t_next;
                    break;
                case TargetKind::deterministic_sine:
                    target_[i] = spec.initial + spec.amplitude * std::sin(spec.frequency * t_next);
                    break;
                default:
                    break;
            }
            if (!std::isfinite(price_[i])) {
                throw NumericalAbort("scenario: non-finite price at step " + std::to_string(k + 1));
            }
        }
    } else {
        const auto& ko = std::get<KimOmbergModel>(sim.model_);
        const double perp = std::sqrt(std::max(0.0, 1.0 - ko.rho * ko.rho));
        const double phi = lambda_[0];
        const double psi = lambda_[1];
        const double dw = dw_[0];
        const double dw_perp = dw_[1];
        const double dwq = dual ? dw : dw + phi * dt;
        const double dwq_perp = dual ? dw_perp : dw_perp + psi * dt;
        log_density_ += 0.5 * (phi * phi + psi * psi) * dt - phi * dwq - psi * dwq_perp;

        double mu_drift = ko.lambda_rev * (ko.mu_bar - mu_);
        if (dual) mu_drift += -ko.rho * ko.sigma_mu * phi - perp * ko.sigma_mu * psi;
        price_[0] += price_drift_[0] * dt + price_vol_[0] * dw;
        mu_ += mu_drift * dt + ko.sigma_mu * (ko.rho * dw + perp * dw_perp);
        target_[0] = ko_strategy(ko, *sim.riccati_, t_next, mu_);
        if (!std::isfinite(price_[0]) || !std::isfinite(mu_)) {
            throw NumericalAbort("scenario: non-finite state at step " + std::to_string(k + 1));
        }
    }
    ++step_;
    if (!frozen_coefficients_) refresh_coefficients();
}

MarketScenario ScenarioSimulator::simulate(const SeedSpec& seed) const {
    const std::size_t d = dim();
    MarketScenario out{measure_,
                       Path(grid_, d),
                       Path(grid_, d),
                       Path(grid_, d),
                       Path(grid_, d),
                       Path(grid_, d),
                       Path(grid_, d),
                       Path(grid_, kernel_dim_),
                       Path(grid_, 1)};
    Stepper s(*this, seed);
    auto record = [&](std::size_t k) {
        for (std::size_t i = 0; i < d; ++i) {
            out.price(k, i) = s.price()[i];
            out.target(k, i) = s.target()[i];
            out.price_drift(k, i) = s.price_drift()[i];
            out.price_volatility(k, i) = s.price_volatility()[i];
            out.target_drift(k, i) = s.target_drift()[i];
            out.target_volatility(k, i) = s.target_volatility()[i];
        }
        for (std::size_t j = 0; j < kernel_dim_; ++j) out.lambda(k, j) = s.lambda()[j];
        out.density(k, 0) = std::exp(s.log_density());
    };
    record(0);
    for (std::size_t k = 0; k < grid_.n_steps(); ++k) {
        s.advance();
        record(k + 1);
    }
    return out;
}

MarketScenario simulate_scenario(const MarketModel& model, const TargetSpec& target,
                                 Measure measure, const SeedSpec& seed, const TimeGrid& grid) {
    return ScenarioSimulator(model, target, measure, grid).simulate(seed);
}

// ---------------------------------------------------------------------------

bool DiagnosticReport::all_finite() const noexcept {
    for (const auto* m : {&target_coefficients, &price_coefficients, &exp_qv_target, &exp_qv_price,
                          &exp_integral_plus, &exp_integral_minus}) {
        if (!std::isfinite(m->mean) || !std::isfinite(m->stderr)) return false;
    }
    return true;
}

bool DiagnosticReport::any_heavy_tail() const noexcept {
    for (const auto* m : {&target_coefficients, &price_coefficients, &exp_qv_target, &exp_qv_price,
                          &exp_integral_plus, &exp_integral_minus}) {
        if (m->heavy_tail) return true;
    }
    return false;
}

namespace {

MomentEstimate moment_estimate(std::vector<double> samples) {
    MomentEstimate est;
    const auto m = mean_and_stderr(samples);
    est.mean = m.mean;
    est.stderr = m.stderr;
    est.ci_low = m.mean - 1.96 * m.stderr;
    est.ci_high = m.mean + 1.96 * m.stderr;

    std::vector<double> magnitudes(samples.size());
    std::transform(samples.begin(), samples.end(), magnitudes.begin(),
                   [](double v) { return std::fabs(v); });
    std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
    const double total = pairwise_sum(magnitudes);
    const std::size_t top = (magnitudes.size() + 9) / 10;
    const double top_sum =
        pairwise_sum(std::span<const double>(magnitudes.data(), std::min(top, magnitudes.size())));
    est.top_decile_share = total > 0.0 ? top_sum / total : 0.0;
    est.heavy_tail = samples.size() >= 20 && est.top_decile_share > kTopDecileDominance;
    return est;
}

}  // namespace

DiagnosticReport assumption_diagnostics(std::span<const MarketScenario> ensemble, double p,
                                        double iota) {
    if (ensemble.empty()) {
        throw std::invalid_argument("assumption_diagnostics: empty ensemble");
    }
    const std::size_t n = ensemble.size();
    std::vector<double> target_coef(n), price_coef(n), eq_target(n), eq_price(n), e_plus(n),
        e_minus(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& sc = ensemble[j];
        const auto& grid = sc.target.grid();
        const double dt = grid.dt();
        double tc = 0.0;
        double pc = 0.0;
        for (std::size_t k = 0; k < grid.n_steps(); ++k) {
            for (std::size_t i = 0; i < sc.target.dim(); ++i) {
                tc += (std::pow(std::fabs(sc.target_drift(k, i)), p) +
                       std::pow(std::fabs(sc.target_volatility(k, i)), p)) * dt;
                pc += (std::pow(std::fabs(sc.price_drift(k, i)), p) +
                       std::pow(std::fabs(sc.price_volatility(k, i)), p)) * dt;
            }
        }
        target_coef[j] = tc;
        price_coef[j] = pc;
        eq_target[j] = std::exp(iota * quadratic_variation(sc.target).terminal());
        eq_price[j] = std::exp(iota * quadratic_variation(sc.price).terminal());
        double increment = 0.0;
        for (std::size_t i = 0; i < sc.target.dim(); ++i) {
            increment += sc.target.terminal(i) - sc.target(0, i);
        }
        e_plus[j] = std::exp(iota * increment);
        e_minus[j] = std::exp(-iota * increment);
    }
    DiagnosticReport report;
    report.p = p;
    report.iota = iota;
    report.n_paths = n;
    report.target_coefficients = moment_estimate(std::move(target_coef));
    report.price_coefficients = moment_estimate(std::move(price_coef));
    report.exp_qv_target = moment_estimate(std::move(eq_target));
    report.exp_qv_price = moment_estimate(std::move(eq_price));
    report.exp_integral_plus = moment_estimate(std::move(e_plus));
    report.exp_integral_minus = moment_estimate(std::move(e_minus));
    return report;
}

}  // namespace bandtrack
