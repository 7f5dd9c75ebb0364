#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandtrack/csv.hpp"
#include "bandtrack/models.hpp"
#include "bandtrack/tracker.hpp"

namespace bandtrack {

/// Parse or validation failure; line() is 0 when not tied to a file line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& msg, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
    std::string experiment = "sharpness";
    std::string model = "constant";  ///< constant | kim_omberg
    ConstantModel constant;
    KimOmbergModel kim_omberg;
    TargetSpec target;
    Measure measure = Measure::dual_martingale;
    TrackingMode mode = TrackingMode::shares;
    double horizon = 1.0;
    double x0 = 0.0;
    std::size_t n_paths = 10000;
    std::uint64_t master_seed = 7;
    double dt = 0.0;         ///< 0: dt = dt_factor * delta^2 at each grid point
    double dt_factor = 0.01;
    std::vector<double> delta_grid;
    std::vector<double> epsilon_grid;
    double band_exponent = 0.5;  ///< delta = epsilon^band_exponent on epsilon grids
    double p = 2.0;
    double iota = 0.1;
    std::size_t refine_paths = 2000;
    std::size_t dump_paths = 2;
    std::size_t dump_stride = 100;
    std::size_t workers = 1;
    std::string output_dir = "out";

    /// Deltas implied by the grids: delta_grid, or epsilon^band_exponent.
    std::vector<double> deltas() const;
    double step_for(double delta) const { return dt > 0.0 ? dt : dt_factor * delta * delta; }
    MarketModel market() const;
};

/// Defaults of the named experiment.
ExperimentConfig default_config(const std::string& experiment);

/// Applies one key=value assignment; unknown keys and bad values throw.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   std::size_t line = 0);

/// Flat key=value text, '#' comments. `experiment` may appear anywhere and
/// resets nothing; other keys override the defaults of `base`.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base);
ExperimentConfig load_config(const std::string& path, ExperimentConfig base);

/// Rule violations, each naming the field; empty when the config is usable.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

/// Resolved key=value pairs. Worker count and output directory are left out
/// so artifacts do not depend on them.
ConfigEntries resolved_entries(const ExperimentConfig& cfg);

}  // namespace bandtrack
