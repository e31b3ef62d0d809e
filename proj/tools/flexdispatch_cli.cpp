// flexdispatch command-line driver.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 infeasible.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "flexdispatch/data_io.hpp"
#include "flexdispatch/forecasting.hpp"
#include "flexdispatch/optimizer.hpp"
#include "flexdispatch/scenario.hpp"
#include "flexdispatch/sim_harness.hpp"
#include "flexdispatch/synthetic.hpp"

namespace fd = flexdispatch;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInfeasible = 3;

constexpr const char* kOutputDirEnv = "FLEXDISPATCH_OUTPUT_DIR";

enum class Kind { Number, Integer, Text };

// Each config-file key has exactly one flag.
struct Binding {
    const char* flag;
    const char* pointer;
    Kind kind;
    const char* help;
};

constexpr Binding kScenarioFlags[] = {
    {"--seed", "/seed", Kind::Integer, "RNG seed for synthetic data"},
    {"--objective", "/objective", Kind::Text, "peak | spot"},
    {"--days", "/days", Kind::Integer, "scored days (synthetic) or cap on CSV days"},
    {"--warmup-days", "/warmup_days", Kind::Integer, "history days before the first scored day"},
    {"--initial-kwh", "/initial_kwh", Kind::Number, "stored energy at the start of the first scored day"},
    {"--power-kw", "/battery/power_kw", Kind::Number, "battery charge/discharge power"},
    {"--capacity-kwh", "/battery/capacity_kwh", Kind::Number, "battery capacity"},
    {"--efficiency", "/battery/efficiency", Kind::Number, "charge-side efficiency in (0, 1]"},
    {"--reserve-kwh", "/battery/reserve_kwh", Kind::Number, "planning reserve"},
    {"--controller", "/controller/type", Kind::Text, "none | rule | mpc | optimal"},
    {"--phi", "/controller/phi", Kind::Number, "dead band as a fraction of battery power"},
    {"--replan", "/controller/replan", Kind::Text, "market-step | minute"},
    {"--rule-discharge-pct", "/rule/discharge_percentile", Kind::Number, "rule discharge percentile"},
    {"--rule-charge-pct", "/rule/charge_percentile", Kind::Number, "rule charge percentile"},
    {"--rule-lookback-days", "/rule/lookback_days", Kind::Integer, "rule threshold lookback"},
    {"--forecaster", "/forecaster/type", Kind::Text, "perfect | persistence | seasonal-naive | external"},
    {"--forecast-csv", "/forecaster/path", Kind::Text, "forecast CSV for the external forecaster"},
    {"--load-csv", "/data/load_csv", Kind::Text, "minute net-load CSV (empty: synthetic)"},
    {"--price-csv", "/data/price_csv", Kind::Text, "spot price CSV (empty: synthetic)"},
    {"--fill", "/data/fill", Kind::Text, "gap policy: error | hold"},
    {"--night-base-kw", "/data/synthetic/night_base_kw", Kind::Number, "synthetic night load"},
    {"--day-plateau-kw", "/data/synthetic/day_plateau_kw", Kind::Number, "synthetic opening-hours load"},
    {"--preopen-peak-kw", "/data/synthetic/preopen_peak_kw", Kind::Number, "synthetic pre-open peak"},
    {"--open-hour", "/data/synthetic/open_hour", Kind::Integer, "store opening hour"},
    {"--close-hour", "/data/synthetic/close_hour", Kind::Integer, "store closing hour"},
    {"--pv-peak-kw", "/data/synthetic/pv_peak_kw", Kind::Number, "clear-sky PV peak"},
    {"--noise-sigma-kw", "/data/synthetic/noise_sigma_kw", Kind::Number, "AR(1) noise standard deviation"},
    {"--noise-autocorr", "/data/synthetic/noise_autocorr", Kind::Number, "AR(1) coefficient per minute"},
    {"--afternoon-bump-kw", "/data/synthetic/afternoon_bump_kw", Kind::Number, "afternoon rush height"},
    {"--weekend-scale", "/data/synthetic/weekend_scale", Kind::Number, "weekend scaling above the night base"},
    {"--start", "/data/synthetic/start", Kind::Text, "first synthetic day (ISO-8601)"},
    {"--price-base", "/data/price/base", Kind::Number, "synthetic mean price, currency/kWh"},
    {"--price-amplitude", "/data/price/amplitude", Kind::Number, "synthetic diurnal price swing"},
    {"--spike-prob", "/data/price/spike_prob", Kind::Number, "synthetic price spike probability per step"},
    {"--output-dir", "/output_dir", Kind::Text, "output directory (env FLEXDISPATCH_OUTPUT_DIR)"},
};

// Battery axes that `sweep` replaces with list-valued grid flags.
bool is_sweep_axis(std::string_view flag) {
    return flag == "--power-kw" || flag == "--capacity-kwh" || flag == "--efficiency";
}

struct ScenarioFlags {
    std::string config_path;
    std::map<std::string, std::string> values;

    void attach(CLI::App& app, bool skip_sweep_axes = false) {
        app.add_option("--config", config_path, "JSON scenario config; flags override its keys")
            ->check(CLI::ExistingFile);
        for (const auto& b : kScenarioFlags) {
            if (skip_sweep_axes && is_sweep_axis(b.flag)) continue;
            app.add_option(b.flag, values[b.flag], b.help);
        }
    }

    json merged(const CLI::App& app) const {
        json j = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            try {
                j = json::parse(in);
            } catch (const json::exception& e) {
                throw fd::ConfigError(fmt::format("{}: {}", config_path, e.what()));
            }
        }
        for (const auto& b : kScenarioFlags) {
            const auto it = values.find(b.flag);
            if (it == values.end() || app.count(b.flag) == 0) continue;
            const std::string& text = it->second;
            const json::json_pointer ptr(b.pointer);
            try {
                switch (b.kind) {
                    case Kind::Number: j[ptr] = std::stod(text); break;
                    case Kind::Integer: j[ptr] = std::stoll(text); break;
                    case Kind::Text: j[ptr] = text; break;
                }
            } catch (const std::logic_error&) {
                throw fd::ConfigError(fmt::format("{}: cannot parse '{}'", b.flag, text));
            }
        }
        return j;
    }
};

std::filesystem::path output_dir(const json& merged) {
    if (merged.contains("output_dir")) return merged.at("output_dir").get<std::string>();
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "out";
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            throw fd::ConfigError(fmt::format("{}: cannot parse '{}'", flag, item));
        }
    }
    return out;
}

std::string format_pct(const std::optional<double>& v) {
    return v ? fmt::format("{:8.3f}", *v) : fmt::format("{:>8}", "n/a");
}

int cmd_gen_data(const CLI::App& app, const ScenarioFlags& flags) {
    const json merged = flags.merged(app);
    const fd::ScenarioConfig config = fd::scenario_from_json(merged);
    // only the data settings matter here, the controller is not run
    if (config.days < 1) throw fd::ConfigError("--days must be >= 1");
    if (config.warmup_days < 0) throw fd::ConfigError("--warmup-days must be >= 0");
    const int total_days = config.warmup_days + config.days;
    fd::StoreProfileConfig store = config.data.synthetic;
    store.rng_seed = fd::load_seed(config.seed);
    fd::PriceProfileConfig price = config.data.price;
    price.rng_seed = fd::price_seed(config.seed);
    price.start = store.start;

    const auto dir = output_dir(merged);
    fd::save_power_csv(dir / "load.csv", fd::generate_synthetic(store, total_days));
    fd::save_price_csv(dir / "price.csv", fd::generate_price(price, total_days));
    fmt::print("wrote {} and {} ({} warm-up + {} days, seed {})\n", (dir / "load.csv").string(),
               (dir / "price.csv").string(), config.warmup_days, config.days, config.seed);
    return kExitOk;
}

struct OptimizeFlags {
    std::string forecast;
    std::string prices;
    std::string objective = "peak";
    double power_kw = fd::BatterySpec{}.power_kw;
    double capacity_kwh = fd::BatterySpec{}.capacity_kwh;
    double efficiency = 1.0;
    double reserve_kwh = 0.0;
    std::optional<double> initial_kwh;
    bool oracle = false;
    std::string output_dir;
};

int cmd_optimize(const OptimizeFlags& f) {
    fd::BatterySpec spec{f.power_kw, f.capacity_kwh, f.efficiency, f.reserve_kwh};
    spec.validate();
    const fd::Objective objective = fd::parse_objective(f.objective);
    if (objective == fd::Objective::SpotMin && f.prices.empty()) {
        throw fd::ConfigError("--objective spot requires --prices");
    }
    fd::TimeSeries forecast = fd::load_forecast_csv(f.forecast);
    std::optional<fd::TimeSeries> prices;
    if (!f.prices.empty()) prices = fd::load_price_csv(f.prices).window(forecast.start(), forecast.end());

    const fd::DispatchProblem problem{forecast, prices, spec,
                                      fd::BatteryState{f.initial_kwh.value_or(0.5 * spec.capacity_kwh)}, objective};
    const fd::DispatchSolution sol = fd::solve_dp(problem);
    const char* unit = objective == fd::Objective::PeakMin ? "kW" : "currency";
    fmt::print("objective ({}): {} {}\n", fd::to_string(objective), sol.objective_value, unit);
    if (f.oracle) {
        const fd::DispatchSolution check = fd::solve_brute_force(problem);
        fmt::print("oracle objective: {} {}\n", check.objective_value, unit);
        fmt::print("oracle {}\n", check.objective_value == sol.objective_value ? "agrees" : "DISAGREES");
    }

    std::filesystem::path dir = f.output_dir;
    if (dir.empty()) {
        const char* env = std::getenv(kOutputDirEnv);
        dir = env && *env ? env : "out";
    }
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "plan.csv", std::ios::binary);
    out << "timestamp,action,target_kw,stored_kwh\n";
    for (std::size_t t = 0; t < sol.actions.size(); ++t) {
        out << fmt::format("{},{},{},{}\n", fd::format_timestamp(forecast.grid().at(t)), fd::to_string(sol.actions[t]),
                           forecast[t] + fd::sign(sol.actions[t]) * spec.power_kw, sol.trajectory[t + 1].stored_kwh);
    }
    fmt::print("wrote {}\n", (dir / "plan.csv").string());
    return kExitOk;
}

int cmd_simulate(const CLI::App& app, const ScenarioFlags& flags) {
    const json merged = flags.merged(app);
    const fd::ScenarioConfig config = fd::scenario_from_json(merged);
    const fd::ScenarioData data = fd::load_scenario_data(config);
    fd::RunTrace trace;
    const fd::SimulationReport report = fd::run_scenario(config, data, &trace);

    const auto dir = output_dir(merged);
    fd::write_json(dir / "report.json", fd::to_json(report));
    fd::write_report_csv(dir / "report.csv", report);
    fd::write_profile_csv(dir / "profile.csv", trace);
    fd::write_action_log_csv(dir / "actions.csv", trace.log);
    fd::write_json(dir / "scenario.json", fd::to_json(config));
    fmt::print("controller {} | {} days | mean peak reduction {:.3f} % | mean cost reduction {} %\n",
               report.controller, report.days.size(), report.mean_peak_reduction_pct,
               format_pct(report.mean_cost_reduction_pct));
    return kExitOk;
}

int cmd_sweep(const CLI::App& app, const ScenarioFlags& flags, const std::string& power, const std::string& capacity,
              const std::string& efficiency, int jobs) {
    const json merged = flags.merged(app);
    const fd::ScenarioConfig config = fd::scenario_from_json(merged);
    fd::SweepGrid grid;
    if (!power.empty()) grid.power_kw = parse_list(power, "--power");
    if (!capacity.empty()) grid.capacity_kwh = parse_list(capacity, "--capacity");
    if (!efficiency.empty()) grid.efficiency = parse_list(efficiency, "--efficiency");

    const auto cells = fd::run_sweep(config, grid, jobs);
    const auto dir = output_dir(merged);
    fd::write_json(dir / "sweep.json", fd::to_json(std::span<const fd::SweepCell>(cells)));
    fd::write_sweep_csv(dir / "sweep.csv", cells);

    std::size_t failed = 0;
    fmt::print("{:>9} {:>12} {:>10} {:>10} {:>10}\n", "power_kw", "capacity_kwh", "efficiency", "peak_%", "cost_%");
    for (const auto& c : cells) {
        if (c.report) {
            fmt::print("{:9.2f} {:12.2f} {:10.3f} {:10.3f} {:>10}\n", c.battery.power_kw, c.battery.capacity_kwh,
                       c.battery.efficiency, c.report->mean_peak_reduction_pct,
                       format_pct(c.report->mean_cost_reduction_pct));
        } else {
            ++failed;
            fmt::print("{:9.2f} {:12.2f} {:10.3f} error: {}\n", c.battery.power_kw, c.battery.capacity_kwh,
                       c.battery.efficiency, c.error);
        }
    }
    if (failed > 0) {
        fmt::print(stderr, "{} of {} sweep cells failed\n", failed, cells.size());
        return kExitData;
    }
    return kExitOk;
}

int cmd_compare(const CLI::App& app, const ScenarioFlags& flags, int jobs) {
    const json merged = flags.merged(app);
    const fd::ScenarioConfig config = fd::scenario_from_json(merged);
    const auto rows = fd::compare_controllers(config, fd::kDefaultComparison, jobs);
    const auto dir = output_dir(merged);
    fd::write_json(dir / "compare.json", fd::to_json(std::span<const fd::ComparisonRow>(rows)));
    fd::write_comparison_csv(dir / "compare.csv", rows);

    fmt::print("objective: {} | battery {} kW / {} kWh / eff {}\n", fd::to_string(config.objective),
               config.battery.power_kw, config.battery.capacity_kwh, config.battery.efficiency);
    fmt::print("{:<10} {:>16} {:>16}\n", "controller", "peak_reduction_%", "cost_reduction_%");
    for (const auto& row : rows) {
        fmt::print("{:<10} {:16.3f} {:>16}\n", row.report.controller, row.report.mean_peak_reduction_pct,
                   format_pct(row.report.mean_cost_reduction_pct));
    }
    return kExitOk;
}

int cmd_forecast_eval(const CLI::App& app, const ScenarioFlags& flags) {
    const json merged = flags.merged(app);
    const fd::ScenarioConfig config = fd::scenario_from_json(merged);
    const fd::ScenarioData data = fd::load_scenario_data(config);
    std::unique_ptr<fd::Forecaster> forecaster;
    switch (config.forecaster) {
        case fd::ForecasterKind::Perfect: forecaster = std::make_unique<fd::PerfectOracle>(data.market); break;
        case fd::ForecasterKind::Persistence: forecaster = std::make_unique<fd::Persistence>(); break;
        case fd::ForecasterKind::SeasonalNaive: forecaster = std::make_unique<fd::SeasonalNaive>(); break;
        case fd::ForecasterKind::External:
            forecaster = std::make_unique<fd::ExternalFile>(config.forecast_csv);
            break;
    }
    const auto report =
        fd::forecast_error_report(*forecaster, data.market, static_cast<std::size_t>(config.warmup_days));

    const auto dir = output_dir(merged);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "forecast_eval.csv", std::ios::binary);
    out << "date,mae_kw,mape_pct\n";
    for (const auto& row : report.days) {
        out << fmt::format("{},{},{}\n", fd::format_timestamp(row.day).substr(0, 10), row.mae_kw, row.mape_pct);
    }
    fmt::print("forecaster {} | {} days | mean MAE {:.3f} kW | mean MAPE {:.3f} %\n", report.forecaster,
               report.days.size(), report.mean_mae_kw, report.mean_mape_pct);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Battery dispatch: day-ahead optimization, closed-loop tracking and replay simulation"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "Write synthetic load.csv and price.csv");
    ScenarioFlags gen_flags;
    gen_flags.attach(*gen);

    auto* opt = app.add_subcommand("optimize", "Optimize one horizon from a forecast CSV");
    OptimizeFlags of;
    opt->add_option("--forecast", of.forecast, "forecast CSV (timestamp,net_kw_forecast)")
        ->required()
        ->check(CLI::ExistingFile);
    opt->add_option("--prices", of.prices, "price CSV (timestamp,eur_per_mwh)")->check(CLI::ExistingFile);
    opt->add_option("--objective", of.objective, "peak | spot")->capture_default_str();
    opt->add_option("--power-kw", of.power_kw, "battery power")->capture_default_str();
    opt->add_option("--capacity-kwh", of.capacity_kwh, "battery capacity")->capture_default_str();
    opt->add_option("--efficiency", of.efficiency, "charge-side efficiency")->capture_default_str();
    opt->add_option("--reserve-kwh", of.reserve_kwh, "planning reserve")->capture_default_str();
    opt->add_option("--initial-kwh", of.initial_kwh, "initial stored energy (default: half capacity)");
    opt->add_flag("--oracle", of.oracle, "also run the brute-force oracle (horizon <= 12)");
    opt->add_option("--output-dir", of.output_dir, "output directory (env FLEXDISPATCH_OUTPUT_DIR)");

    auto* sim = app.add_subcommand("simulate", "Replay a corpus through one controller");
    ScenarioFlags sim_flags;
    sim_flags.attach(*sim);

    auto* sweep = app.add_subcommand("sweep", "Battery power x capacity x efficiency sweep");
    ScenarioFlags sweep_flags;
    sweep_flags.attach(*sweep, true);
    std::string sweep_power, sweep_capacity, sweep_efficiency;
    int sweep_jobs = 1;
    sweep->add_option("--power", sweep_power, "comma-separated battery powers, kW");
    sweep->add_option("--capacity", sweep_capacity, "comma-separated capacities, kWh");
    sweep->add_option("--efficiency", sweep_efficiency, "comma-separated efficiencies");
    sweep->add_option("--jobs", sweep_jobs, "parallel cells")->capture_default_str();

    auto* cmp = app.add_subcommand("compare", "Compare optimal / mpc / rule / none on one corpus");
    ScenarioFlags cmp_flags;
    cmp_flags.attach(*cmp);
    int cmp_jobs = 1;
    cmp->add_option("--jobs", cmp_jobs, "parallel rows")->capture_default_str();

    auto* fev = app.add_subcommand("forecast-eval", "Per-day MAE/MAPE of a forecaster");
    ScenarioFlags fev_flags;
    fev_flags.attach(*fev);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen) return cmd_gen_data(*gen, gen_flags);
        if (*opt) return cmd_optimize(of);
        if (*sim) return cmd_simulate(*sim, sim_flags);
        if (*sweep) return cmd_sweep(*sweep, sweep_flags, sweep_power, sweep_capacity, sweep_efficiency, sweep_jobs);
        if (*cmp) return cmd_compare(*cmp, cmp_flags, cmp_jobs);
        if (*fev) return cmd_forecast_eval(*fev, fev_flags);
    } catch (const fd::ConfigError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const fd::InfeasibleError& e) {
        fmt::print(stderr, "infeasible: {}\n", e.what());
        return kExitInfeasible;
    } catch (const fd::Error& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
