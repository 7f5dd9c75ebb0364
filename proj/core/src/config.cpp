#include "bandtrack/config.hpp"

#include "bandtrack/estimator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace bandtrack {

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"sharpness",      "pathwise_bound", "tracking_error",
                                                "utility_loss",   "monetary_bound", "foc_check",
                                                "diagnostics"};
    return names;
}

std::vector<double> ExperimentConfig::deltas() const {
    if (!delta_grid.empty()) return delta_grid;
    std::vector<double> out;
    for (double e : epsilon_grid) out.push_back(std::pow(e, band_exponent));
    return out;
}

MarketModel ExperimentConfig::market() const {
    if (model == "kim_omberg") {
        KimOmbergModel m = kim_omberg;
        m.horizon = horizon;
        return m;
    }
    return constant;
}

namespace {

std::vector<double> logspace(double a, double b, std::size_t n) {
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back(std::pow(10.0, e));
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& v, std::size_t line) {
    double x = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x)) {
        throw ConfigError(key + ": expected a number, got '" + v + "'", line);
    }
    return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v, std::size_t line) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'", line);
    }
    return x;
}

/// "a,b,c" or "logspace:lo:hi:n" (decimal exponents).
std::vector<double> to_grid(const std::string& key, const std::string& v, std::size_t line) {
    std::vector<double> out;
    if (v.empty()) return out;
    if (v.rfind("logspace:", 0) == 0) {
        std::vector<std::string> parts;
        std::stringstream ss(v.substr(9));
        for (std::string item; std::getline(ss, item, ':');) parts.push_back(trim(item));
        if (parts.size() != 3) throw ConfigError(key + ": expected logspace:lo:hi:n", line);
        return logspace(to_double(key, parts[0], line), to_double(key, parts[1], line),
                        to_uint(key, parts[2], line));
    }
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(to_double(key, trim(item), line));
    return out;
}

std::string grid_text(const std::vector<double>& g) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + format_double(g[i]);
    return s;
}

struct Key {
    std::string name;
    std::function<void(ExperimentConfig&, const std::string&, std::size_t)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

Key num(std::string name, double ExperimentConfig::*field) {
    return {name,
            [name, field](ExperimentConfig& c, const std::string& v, std::size_t l) {
                c.*field = to_double(name, v, l);
            },
            [field](const ExperimentConfig& c) { return format_double(c.*field); }};
}

Key count(std::string name, std::size_t ExperimentConfig::*field) {
    return {name,
            [name, field](ExperimentConfig& c, const std::string& v, std::size_t l) {
                c.*field = static_cast<std::size_t>(to_uint(name, v, l));
            },
            [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

template <class M>
Key model_num(std::string name, M ExperimentConfig::*model, double M::*field) {
    return {name,
            [name, model, field](ExperimentConfig& c, const std::string& v, std::size_t l) {
                (c.*model).*field = to_double(name, v, l);
            },
            [model, field](const ExperimentConfig& c) { return format_double((c.*model).*field); }};
}

Key target_num(std::string name, double TargetSpec::*field) {
    return model_num(std::move(name), &ExperimentConfig::target, field);
}

const std::vector<Key>& keys() {
    using C = ExperimentConfig;
    static const std::vector<Key> table{
        {"experiment",
         [](C& c, const std::string& v, std::size_t l) {
             const auto& n = experiment_names();
             if (std::find(n.begin(), n.end(), v) == n.end()) {
                 throw ConfigError("experiment: unknown experiment '" + v + "'", l);
             }
             c.experiment = v;
         },
         [](const C& c) { return c.experiment; }},
        {"model",
         [](C& c, const std::string& v, std::size_t l) {
             if (v != "constant" && v != "kim_omberg") {
                 throw ConfigError("model: expected constant or kim_omberg", l);
             }
             c.model = v;
         },
         [](const C& c) { return c.model; }},
        {"dynamics",
         [](C& c, const std::string& v, std::size_t l) {
             if (v == "arithmetic") c.constant.dynamics = PriceDynamics::arithmetic;
             else if (v == "geometric") c.constant.dynamics = PriceDynamics::geometric;
             else throw ConfigError("dynamics: expected arithmetic or geometric", l);
         },
         [](const C& c) {
             return std::string(c.constant.dynamics == PriceDynamics::geometric ? "geometric"
                                                                               : "arithmetic");
         }},
        model_num("mu", &C::constant, &ConstantModel::mu),
        model_num("sigma", &C::constant, &ConstantModel::sigma),
        model_num("s0", &C::constant, &ConstantModel::s0),
        model_num("risk_aversion", &C::constant, &ConstantModel::risk_aversion),
        model_num("ko_sigma_s", &C::kim_omberg, &KimOmbergModel::sigma_s),
        model_num("ko_lambda", &C::kim_omberg, &KimOmbergModel::lambda_rev),
        model_num("ko_mu_bar", &C::kim_omberg, &KimOmbergModel::mu_bar),
        model_num("ko_sigma_mu", &C::kim_omberg, &KimOmbergModel::sigma_mu),
        model_num("ko_rho", &C::kim_omberg, &KimOmbergModel::rho),
        model_num("ko_risk_aversion", &C::kim_omberg, &KimOmbergModel::risk_aversion),
        model_num("ko_mu0", &C::kim_omberg, &KimOmbergModel::mu0),
        model_num("ko_s0", &C::kim_omberg, &KimOmbergModel::s0),
        model_num("ko_riccati_step", &C::kim_omberg, &KimOmbergModel::riccati_step),
        {"target",
         [](C& c, const std::string& v, std::size_t l) {
             try {
                 c.target.kind = parse_target_kind(v);
             } catch (const std::exception& e) {
                 throw ConfigError(std::string("target: ") + e.what(), l);
             }
         },
         [](const C& c) { return to_string(c.target.kind); }},
        {"target_dim",
         [](C& c, const std::string& v, std::size_t l) {
             c.target.dim = static_cast<std::size_t>(to_uint("target_dim", v, l));
         },
         [](const C& c) { return std::to_string(c.target.dim); }},
        target_num("target_initial", &TargetSpec::initial),
        target_num("target_scale", &TargetSpec::scale),
        target_num("target_slope", &TargetSpec::slope),
        target_num("target_amplitude", &TargetSpec::amplitude),
        target_num("target_frequency", &TargetSpec::frequency),
        {"measure",
         [](C& c, const std::string& v, std::size_t l) {
             try {
                 c.measure = parse_measure(v);
             } catch (const std::exception& e) {
                 throw ConfigError(std::string("measure: ") + e.what(), l);
             }
         },
         [](const C& c) { return to_string(c.measure); }},
        {"mode",
         [](C& c, const std::string& v, std::size_t l) {
             if (v == "shares") c.mode = TrackingMode::shares;
             else if (v == "monetary") c.mode = TrackingMode::monetary;
             else throw ConfigError("mode: expected shares or monetary", l);
         },
         [](const C& c) { return to_string(c.mode); }},
        num("horizon", &C::horizon),
        num("x0", &C::x0),
        count("n_paths", &C::n_paths),
        {"seed",
         [](C& c, const std::string& v, std::size_t l) { c.master_seed = to_uint("seed", v, l); },
         [](const C& c) { return std::to_string(c.master_seed); }},
        num("dt", &C::dt),
        num("dt_factor", &C::dt_factor),
        {"delta_grid",
         [](C& c, const std::string& v, std::size_t l) { c.delta_grid = to_grid("delta_grid", v, l); },
         [](const C& c) { return grid_text(c.delta_grid); }},
        {"epsilon_grid",
         [](C& c, const std::string& v, std::size_t l) {
             c.epsilon_grid = to_grid("epsilon_grid", v, l);
         },
         [](const C& c) { return grid_text(c.epsilon_grid); }},
        num("band_exponent", &C::band_exponent),
        num("p", &C::p),
        num("iota", &C::iota),
        count("refine_paths", &C::refine_paths),
        count("dump_paths", &C::dump_paths),
        count("dump_stride", &C::dump_stride),
        count("workers", &C::workers),
        {"output_dir", [](C& c, const std::string& v, std::size_t) { c.output_dir = v; },
         [](const C& c) { return c.output_dir; }},
    };
    return table;
}

}  // namespace

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    apply_setting(c, "experiment", experiment);
    const auto eps_grid = logspace(-4.0, -2.0, 5);
    if (experiment == "sharpness") {
        c.delta_grid = {0.2, 0.1, 0.05};
        c.p = 1.0;
    } else if (experiment == "pathwise_bound") {
        c.delta_grid = {0.2, 0.1, 0.05};
        c.p = 1.0;
    } else if (experiment == "tracking_error") {
        c.epsilon_grid = eps_grid;
        c.band_exponent = 0.5;
    } else if (experiment == "utility_loss") {
        c.constant.mu = 0.05;
        c.target.kind = TargetKind::merton;
        c.measure = Measure::physical;
        c.epsilon_grid = eps_grid;
        c.band_exponent = 1.0 / 3.0;
        c.n_paths = 100000;
        c.p = 1.0;
    } else if (experiment == "monetary_bound") {
        c.constant.dynamics = PriceDynamics::geometric;
        c.mode = TrackingMode::monetary;
        c.delta_grid = {0.1};
        c.p = 1.0;
    } else if (experiment == "foc_check") {
        c.constant.mu = 0.05;
        c.target.kind = TargetKind::merton;
        c.measure = Measure::physical;
        c.dt = 1e-4;
        c.n_paths = 100000;
    } else if (experiment == "diagnostics") {
        c.model = "kim_omberg";
        c.target.kind = TargetKind::kim_omberg;
        c.measure = Measure::physical;
        c.dt = 1e-3;
        c.n_paths = 2000;
    }
    return c;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   std::size_t line) {
    for (const auto& k : keys()) {
        if (k.name == key) {
            k.set(cfg, value, line);
            return;
        }
    }
    throw ConfigError("unknown key '" + key + "'", line);
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
    std::istringstream in(text);
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value", line_no);
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("empty key", line_no);
        apply_setting(base, key, trim(line.substr(eq + 1)), line_no);
    }
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> v;
    const auto& e = c.experiment;
    for (double eps : c.epsilon_grid) {
        if (!(eps > 0.0 && eps < 1.0)) {
            v.push_back("epsilon_grid: epsilon must lie in (0,1), got " + format_double(eps));
        }
    }
    const auto deltas = c.deltas();
    for (double d : deltas) {
        if (!(d > 0.0 && d < 1.0)) {
            v.push_back("delta: delta must lie in (0,1), got " + format_double(d));
        }
    }
    const bool needs_band = e != "foc_check" && e != "diagnostics";
    if (needs_band && deltas.empty()) v.push_back("delta_grid: experiment needs a delta or epsilon grid");
    if ((e == "tracking_error" || e == "utility_loss") && c.epsilon_grid.size() < kMinScalingPoints) {
        v.push_back("epsilon_grid: scaling fit needs at least 4 epsilon values");
    }
    if (!deltas.empty()) {
        const double dmin = *std::min_element(deltas.begin(), deltas.end());
        const double limit = dmin * dmin / 100.0;
        if (c.dt > 0.0 && c.dt > limit * (1.0 + 1e-12)) {
            v.push_back("dt: " + format_double(c.dt) + " exceeds delta_min^2/100 = " +
                        format_double(limit) + " (grid coupling rule)");
        }
    }
    if (!(c.dt_factor > 0.0 && c.dt_factor <= 0.01)) {
        v.push_back("dt_factor: must lie in (0, 0.01] (grid coupling rule dt <= delta^2/100)");
    }
    if (c.dt < 0.0) v.push_back("dt: must be nonnegative");
    if ((e == "foc_check" || e == "diagnostics") && !(c.dt > 0.0)) {
        v.push_back("dt: experiment needs an explicit positive dt");
    }
    if (!(c.horizon > 0.0)) v.push_back("horizon: must be positive");
    if (c.n_paths < 2) v.push_back("n_paths: need at least 2 paths");
    if (!(c.p >= 1.0)) v.push_back("p: must be at least 1");
    if (!(c.iota > 0.0)) v.push_back("iota: must be positive");
    if (c.target.dim == 0) v.push_back("target_dim: must be at least 1");
    if (!(c.band_exponent > 0.0)) v.push_back("band_exponent: must be positive");
    try {
        if (c.model == "kim_omberg") {
            auto m = c.kim_omberg;
            m.horizon = c.horizon;
            m.validate();
        } else {
            c.constant.validate();
        }
    } catch (const std::exception& ex) {
        v.push_back(std::string("model: ") + ex.what());
    }
    const bool ko = c.model == "kim_omberg";
    if (c.target.kind == TargetKind::kim_omberg && !ko) {
        v.push_back("target: kim_omberg target needs model=kim_omberg");
    }
    if (ko && c.target.kind != TargetKind::kim_omberg) {
        v.push_back("target: model=kim_omberg only supports target=kim_omberg");
    }
    if (c.mode == TrackingMode::monetary && c.constant.dynamics != PriceDynamics::geometric) {
        v.push_back("mode: monetary tracking needs dynamics=geometric");
    }
    if (e == "monetary_bound" && c.mode != TrackingMode::monetary) {
        v.push_back("mode: monetary_bound needs mode=monetary");
    }
    if ((e == "utility_loss" || e == "foc_check") && c.measure != Measure::physical) {
        v.push_back("measure: utility experiments run under the physical measure");
    }
    return v;
}

ConfigEntries resolved_entries(const ExperimentConfig& cfg) {
    ConfigEntries out;
    for (const auto& k : keys()) {
        if (k.name == "workers" || k.name == "output_dir") continue;
        out.emplace_back(k.name, k.get(cfg));
    }
    return out;
}

}  // namespace bandtrack
