#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bandtrack/config.hpp"
#include "bandtrack/experiments.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
    std::optional<double> delta;
    std::optional<double> epsilon;
    std::optional<double> lambda;
    std::vector<std::string> settings;
};

void add_common_flags(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--config", o.config_path, "key=value config file");
    cmd.add_option("--seed", o.seed, "master seed");
    cmd.add_option("--paths", o.paths, "number of Monte Carlo paths");
    cmd.add_option("--dt", o.dt, "time step (default: dt_factor * delta^2 per grid point)");
    cmd.add_option("--out", o.out, "output directory");
    cmd.add_option("--workers", o.workers, "worker threads (0 = all cores)");
    cmd.add_option("--delta", o.delta, "single band half-width");
    cmd.add_option("--epsilon", o.epsilon, "single cost level");
    cmd.add_option("--lambda", o.lambda, "market price of risk; sets mu = lambda * sigma");
    cmd.add_option("--set", o.settings, "extra key=value override (repeatable)");
}

bandtrack::ExperimentConfig resolve(std::optional<std::string> experiment, const Overrides& o) {
    using namespace bandtrack;
    std::string text;
    if (!o.config_path.empty()) {
        // Read once to learn the experiment named in the file.
        const auto probe = load_config(o.config_path, ExperimentConfig{});
        if (!experiment) experiment = probe.experiment;
    }
    ExperimentConfig cfg = default_config(experiment.value_or("sharpness"));
    if (!o.config_path.empty()) {
        cfg = load_config(o.config_path, cfg);
        if (cfg.experiment != *experiment) {
            throw ConfigError("config names experiment '" + cfg.experiment + "' but '" +
                              *experiment + "' was requested");
        }
    }
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.paths) cfg.n_paths = *o.paths;
    if (o.dt) cfg.dt = *o.dt;
    if (o.out) cfg.output_dir = *o.out;
    if (o.workers) cfg.workers = *o.workers;
    if (o.delta) {
        cfg.delta_grid = {*o.delta};
        cfg.epsilon_grid.clear();
    }
    if (o.epsilon) {
        cfg.epsilon_grid = {*o.epsilon};
        if (o.delta) cfg.delta_grid = {*o.delta};
    }
    if (o.lambda) cfg.constant.mu = *o.lambda * cfg.constant.sigma;
    for (const auto& kv : o.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace bandtrack;
    CLI::App app{"Band tracking under proportional transaction costs"};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);

    Overrides run_o, val_o;
    std::string run_exp;
    std::optional<std::string> val_exp;

    auto* run = app.add_subcommand("run", "run an experiment and write CSV artifacts");
    run->add_option("experiment", run_exp, "experiment name")
        ->required()
        ->check(CLI::IsMember(experiment_names()));
    add_common_flags(*run, run_o);

    auto* val = app.add_subcommand("validate", "check a config and list rule violations");
    val->add_option("experiment", val_exp, "experiment name")->check(CLI::IsMember(experiment_names()));
    add_common_flags(*val, val_o);

    app.add_subcommand("list", "list experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (app.got_subcommand("list")) {
            for (const auto& n : experiment_names()) std::cout << n << '\n';
            return kExitPass;
        }
        if (app.got_subcommand("validate")) {
            const auto cfg = resolve(val_exp, val_o);
            const auto violations = validate_config(cfg);
            for (const auto& v : violations) std::cout << v << '\n';
            if (violations.empty()) std::cout << "ok\n";
            return violations.empty() ? kExitPass : kExitConfig;
        }
        const auto cfg = resolve(run_exp, run_o);
        return run_and_report(cfg, std::cout, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
