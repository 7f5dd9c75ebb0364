#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bandtrack/config.hpp"

namespace bandtrack {

enum ExitCode : int { kExitPass = 0, kExitFailure = 1, kExitConfig = 2, kExitNumerical = 3 };

/// One acceptance check. `rule` says how observed is compared with expected:
/// within  |observed - expected| <= tolerance
/// at_least observed >= expected - tolerance
/// at_most  observed <= expected + tolerance
struct SummaryRow {
    enum class Rule { within, at_least, at_most };

    std::string name;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    Rule rule = Rule::within;

    bool pass() const noexcept;
};

struct ExperimentResult {
    std::string experiment;
    std::vector<SummaryRow> rows;
    std::vector<std::string> files;  ///< written artifacts, relative to the output dir

    bool all_pass() const noexcept;
    bool all_finite() const noexcept;
};

/// Runs cfg.experiment and writes its CSV artifacts into cfg.output_dir.
/// Throws ConfigError for invalid configs and NumericalAbort on divergence.
/// Progress lines go to `log` when given.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// run_experiment with the exit-code contract: 0 all rows pass, 1 some row
/// fails, 2 config error, 3 numerical abort or non-finite result.
int run_and_report(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace bandtrack
