#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bandtrack/paths.hpp"
#include "bandtrack/riccati.hpp"

namespace bandtrack {

enum class PriceDynamics { arithmetic, geometric };
enum class Measure { physical, dual_martingale };

std::string to_string(Measure m);
Measure parse_measure(const std::string& name);

/// Constant-coefficient market. Arithmetic: dS = mu dt + sigma dW.
/// Geometric: dS = S (mu dt + sigma dW).
struct ConstantModel {
    double mu = 0.0;
    double sigma = 0.2;
    double s0 = 1.0;
    double risk_aversion = 1.0;
    PriceDynamics dynamics = PriceDynamics::arithmetic;

    double market_price_of_risk() const noexcept { return mu / sigma; }
    void validate() const;
};

/// Arithmetic Kim-Omberg market: dS = mu_t dt + sigma_S dW,
/// dmu = lambda (mu_bar - mu) dt + sigma_mu dW^mu, d<W, W^mu> = rho dt.
struct KimOmbergModel {
    double sigma_s = 0.2;
    double lambda_rev = 1.5;
    double mu_bar = 0.05;
    double sigma_mu = 0.03;
    double rho = -0.7;
    double risk_aversion = 1.0;
    double mu0 = 0.05;
    double s0 = 1.0;
    double horizon = 1.0;
    double riccati_step = 1e-3;

    void validate() const;
};

using MarketModel = std::variant<ConstantModel, KimOmbergModel>;

/// mu / (r sigma^2). Shares in the arithmetic model, money in the geometric one.
double merton_strategy(const ConstantModel& m);

/// mu/(r sigma_S^2) + rho sigma_mu / (r sigma_S) (B(t) + C(t) mu).
double ko_strategy(const KimOmbergModel& m, const RiccatiTable& table, double t, double mu);

/// e^{N_t} with N_t = sum_j [ int lambda_j^2 dt / 2 - int lambda_j dW^Q_j ] (left-point sums),
/// where W^Q is the Brownian motion under the dual measure. Under P one passes
/// dW^Q = dW + lambda dt.
Path girsanov_density(const Path& lambda_path, const Matrix& wq_increments, const TimeGrid& grid);

enum class TargetKind { merton, kim_omberg, pure_brownian, deterministic_ramp, deterministic_sine };

std::string to_string(TargetKind k);
TargetKind parse_target_kind(const std::string& name);

struct TargetSpec {
    TargetKind kind = TargetKind::pure_brownian;
    std::size_t dim = 1;
    double initial = 0.0;    ///< theta_0 for brownian/ramp/sine
    double scale = 1.0;      ///< brownian volatility
    double slope = 1.0;      ///< ramp slope
    double amplitude = 1.0;  ///< sine amplitude
    double frequency = 6.283185307179586;  ///< sine angular frequency
};

/// One simulated realization. All paths share the grid; price, target and
/// their coefficient paths have target.dim columns; lambda has one column per
/// Girsanov kernel.
struct MarketScenario {
    Measure measure;
    Path price;
    Path target;
    Path price_drift;
    Path price_volatility;
    Path target_drift;
    Path target_volatility;
    Path lambda;
    Path density;
};

/// Immutable simulation recipe shared by all paths of an experiment.
class ScenarioSimulator {
public:
    ScenarioSimulator(MarketModel model, TargetSpec target, Measure measure, TimeGrid grid);

    const MarketModel& model() const noexcept { return model_; }
    const TargetSpec& target() const noexcept { return target_; }
    Measure measure() const noexcept { return measure_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return target_.dim; }
    std::size_t noise_dim() const noexcept { return noise_dim_; }
    std::size_t kernel_dim() const noexcept { return kernel_dim_; }
    const RiccatiTable* riccati() const noexcept { return riccati_.get(); }

    MarketScenario simulate(const SeedSpec& seed) const;

    /// Incremental state of one path; advance() moves from t_k to t_{k+1}.
    class Stepper {
    public:
        Stepper(const ScenarioSimulator& sim, const SeedSpec& seed);

        void advance();

        std::size_t step() const noexcept { return step_; }
        double time() const noexcept { return sim_->grid_.time(step_); }
        std::span<const double> price() const noexcept { return price_; }
        std::span<const double> target() const noexcept { return target_; }
        std::span<const double> price_drift() const noexcept { return price_drift_; }
        std::span<const double> price_volatility() const noexcept { return price_vol_; }
        std::span<const double> target_drift() const noexcept { return target_drift_; }
        std::span<const double> target_volatility() const noexcept { return target_vol_; }
        std::span<const double> lambda() const noexcept { return lambda_; }
        double log_density() const noexcept { return log_density_; }
        double drift_state() const noexcept { return mu_; }

    private:
        void refresh_coefficients();

        const ScenarioSimulator* sim_;
        IncrementStream noise_;
        std::size_t step_ = 0;
        double mu_ = 0.0;
        double log_density_ = 0.0;
        bool frozen_coefficients_ = false;
        std::vector<double> price_, target_, price_drift_, price_vol_, target_drift_, target_vol_,
            lambda_, dw_;
    };

    Stepper stepper(const SeedSpec& seed) const { return Stepper(*this, seed); }

private:
    MarketModel model_;
    TargetSpec target_;
    Measure measure_;
    TimeGrid grid_;
    std::size_t noise_dim_ = 0;
    std::size_t kernel_dim_ = 0;
    std::shared_ptr<const RiccatiTable> riccati_;
};

MarketScenario simulate_scenario(const MarketModel& model, const TargetSpec& target,
                                 Measure measure, const SeedSpec& seed, const TimeGrid& grid);

/// Monte Carlo estimate with a normal-approximation confidence interval.
struct MomentEstimate {
    double mean = 0.0;
    double stderr = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double top_decile_share = 0.0;  ///< fraction of the sum carried by the largest 10%
    bool heavy_tail = false;
};

struct DiagnosticReport {
    double p = 2.0;
    double iota = 0.1;
    std::size_t n_paths = 0;
    MomentEstimate target_coefficients;  ///< int E|mu^theta|^p + |sigma^theta|^p dt
    MomentEstimate price_coefficients;   ///< int E|mu^S|^p + |sigma^S|^p dt
    MomentEstimate exp_qv_target;        ///< E exp(iota <theta>_T)
    MomentEstimate exp_qv_price;         ///< E exp(iota <S>_T)
    MomentEstimate exp_integral_plus;    ///< E exp(iota int dtheta)   (xi = +1)
    MomentEstimate exp_integral_minus;   ///< E exp(-iota int dtheta)  (xi = -1)

    bool all_finite() const noexcept;
    bool any_heavy_tail() const noexcept;
};

/// Share of the sum above which the top decile flags a suspicious tail.
inline constexpr double kTopDecileDominance = 0.5;

DiagnosticReport assumption_diagnostics(std::span<const MarketScenario> ensemble, double p,
                                        double iota);

}  // namespace bandtrack
