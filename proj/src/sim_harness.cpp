#include "flexdispatch/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <memory>
#include <thread>

#include <fmt/format.h>

namespace flexdispatch {

namespace {

using nlohmann::ordered_json;

constexpr std::size_t kMinutesPerStep = static_cast<std::size_t>(kMarketStep / kMinute);

std::unique_ptr<Forecaster> make_forecaster(const ScenarioConfig& config, const ScenarioData& data) {
    if (config.controller == ControllerKind::Optimal) return std::make_unique<PerfectOracle>(data.market);
    switch (config.forecaster) {
        case ForecasterKind::Perfect: return std::make_unique<PerfectOracle>(data.market);
        case ForecasterKind::Persistence: return std::make_unique<Persistence>();
        case ForecasterKind::SeasonalNaive: return std::make_unique<SeasonalNaive>();
        case ForecasterKind::External: return std::make_unique<ExternalFile>(config.forecast_csv);
    }
    throw ConfigError("unknown forecaster");
}

double cost_of(const TimeSeries& minutes, const TimeSeries& prices) {
    const double hours = minutes.grid().step_hours();
    double total = 0.0;
    for (std::size_t i = 0; i < minutes.size(); ++i) total += minutes[i] * prices[i / kMinutesPerStep] * hours;
    return total;
}

double energy_of(const TimeSeries& minutes) {
    const double hours = minutes.grid().step_hours();
    double total = 0.0;
    for (double v : minutes.values()) total += v * hours;
    return total;
}

double reduction_pct(double baseline, double controlled) {
    return baseline > 0.0 ? 100.0 * (baseline - controlled) / baseline : 0.0;
}

ordered_json optional_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string optional_csv(const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string{};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

// Runs `count` independent tasks on up to `jobs` threads.
template <typename Task>
void parallel_for(std::size_t count, int jobs, Task task) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) task(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

ScenarioData load_scenario_data(const ScenarioConfig& config) {
    config.validate();
    const auto& src = config.data;
    std::optional<TimeSeries> load;
    std::optional<TimeSeries> prices;
    if (src.load_csv.empty()) {
        StoreProfileConfig store = src.synthetic;
        store.rng_seed = load_seed(config.seed);
        load = generate_synthetic(store, config.warmup_days + config.days);
        if (src.price_csv.empty()) {
            PriceProfileConfig price = src.price;
            price.rng_seed = price_seed(config.seed);
            price.start = store.start;
            prices = generate_price(price, config.warmup_days + config.days);
        }
    } else {
        load = load_power_csv(src.load_csv, src.fill);
        if (load->start() != day_start(load->start()) || load->size() % load->grid().steps_per_day() != 0) {
            throw DataError(fmt::format("{}: load data must cover whole days starting at midnight", src.load_csv));
        }
    }
    if (!src.price_csv.empty()) {
        prices = load_price_csv(src.price_csv, src.fill).window(load->start(), load->end());
    }
    TimeSeries market = resample_mean(*load, kMarketStep);
    return ScenarioData{std::move(*load), std::move(market), std::move(prices)};
}

SimulationReport run_scenario(const ScenarioConfig& config) {
    return run_scenario(config, load_scenario_data(config));
}

SimulationReport run_scenario(const ScenarioConfig& config, const ScenarioData& data, RunTrace* trace) {
    config.validate();
    if (config.objective == Objective::SpotMin && !data.prices) {
        throw ConfigError("spot objective requires price data");
    }
    const std::size_t total_days = data.total_days();
    const auto warmup = static_cast<std::size_t>(config.warmup_days);
    const std::size_t scored = config.days > 0 ? static_cast<std::size_t>(config.days)
                                               : (total_days > warmup ? total_days - warmup : 0);
    if (scored == 0 || warmup + scored > total_days) {
        throw DataError(fmt::format("corpus has {} day(s); need {} warm-up + {} scored", total_days, warmup, scored));
    }

    const std::size_t minutes_per_day = data.load.grid().steps_per_day();
    const std::size_t steps_per_day = data.market.grid().steps_per_day();
    const auto forecaster = make_forecaster(config, data);
    const BatterySpec& spec = config.battery;
    ControllerConfig control = config.control;
    if (config.controller == ControllerKind::Optimal) control.replan = ReplanCadence::EveryMarketStep;

    SimulationReport report;
    report.scenario_hash = config.hash();
    report.controller = std::string(to_string(config.controller));
    report.forecaster = config.controller == ControllerKind::Mpc       ? std::string(to_string(config.forecaster))
                        : config.controller == ControllerKind::Optimal ? "perfect"
                                                                       : "";
    report.objective = std::string(to_string(config.objective));
    report.battery = spec;

    BatteryState state{config.initial_stored_kwh()};
    for (std::size_t d = warmup; d < warmup + scored; ++d) {
        DayInputs day{data.load.slice(d * minutes_per_day, minutes_per_day),
                      data.prices ? std::optional<TimeSeries>(data.prices->slice(d * steps_per_day, steps_per_day))
                                  : std::nullopt,
                      d > 0 ? data.market.slice(0, d * steps_per_day) : TimeSeries{}};
        const BatteryState start_state = state;

        DayRun run;
        switch (config.controller) {
            case ControllerKind::None:
                run.realized = day.baseline;
                run.final_state = state;
                for (std::size_t i = 0; i < day.baseline.size(); ++i) {
                    run.log.push_back({day.baseline.grid().at(i), Action::Idle, state.stored_kwh, day.baseline[i],
                                       day.baseline[i], 0.0});
                }
                break;
            case ControllerKind::Rule:
                run = run_rule_day(day, config.objective, config.rule, spec, state);
                break;
            case ControllerKind::Mpc:
            case ControllerKind::Optimal:
                run = run_control_loop(day, *forecaster, solve_dp, config.objective, spec, state, control);
                break;
        }
        state = run.final_state;
        report.solves += run.solves;
        report.fallbacks += run.fallbacks;

        DayRecord rec;
        rec.date = day.baseline.start();
        rec.baseline_peak_kw = resample_mean(day.baseline, kMarketStep).max();
        rec.controlled_peak_kw = resample_mean(run.realized, kMarketStep).max();
        rec.peak_reduction_pct = reduction_pct(rec.baseline_peak_kw, rec.controlled_peak_kw);
        rec.baseline_minute_peak_kw = day.baseline.max();
        rec.controlled_minute_peak_kw = run.realized.max();
        if (day.prices) {
            rec.baseline_cost = cost_of(day.baseline, *day.prices);
            rec.controlled_cost = cost_of(run.realized, *day.prices);
            rec.cost_reduction_pct = reduction_pct(*rec.baseline_cost, *rec.controlled_cost);
        }
        rec.baseline_energy_kwh = energy_of(day.baseline);
        rec.controlled_energy_kwh = energy_of(run.realized);
        rec.min_stored_kwh = start_state.stored_kwh;
        rec.max_stored_kwh = start_state.stored_kwh;
        const double minute_hours = day.baseline.grid().step_hours();
        for (std::size_t i = 0; i < run.log.size(); ++i) {
            const double delta = run.realized[i] - day.baseline[i];
            if (run.log[i].action == Action::Discharge) rec.discharged_kwh -= delta * minute_hours;
            if (run.log[i].action == Action::Charge) rec.charged_kwh += delta * minute_hours;
            rec.min_stored_kwh = std::min(rec.min_stored_kwh, run.log[i].stored_kwh);
            rec.max_stored_kwh = std::max(rec.max_stored_kwh, run.log[i].stored_kwh);
        }
        report.days.push_back(rec);

        if (trace) {
            trace->log.insert(trace->log.end(), run.log.begin(), run.log.end());
            trace->baseline_kw.insert(trace->baseline_kw.end(), day.baseline.values().begin(),
                                      day.baseline.values().end());
        }
    }

    const auto n = static_cast<double>(report.days.size());
    double cost_sum = 0.0;
    bool have_cost = true;
    for (const auto& rec : report.days) {
        report.mean_peak_reduction_pct += rec.peak_reduction_pct / n;
        report.mean_baseline_peak_kw += rec.baseline_peak_kw / n;
        report.mean_controlled_peak_kw += rec.controlled_peak_kw / n;
        if (rec.cost_reduction_pct) {
            cost_sum += *rec.cost_reduction_pct / n;
        } else {
            have_cost = false;
        }
    }
    if (have_cost) report.mean_cost_reduction_pct = cost_sum;
    return report;
}

std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const SweepGrid& grid, int jobs) {
    const auto axis = [](const std::vector<double>& values, double fallback) {
        return values.empty() ? std::vector<double>{fallback} : values;
    };
    const auto powers = axis(grid.power_kw, base.battery.power_kw);
    const auto capacities = axis(grid.capacity_kwh, base.battery.capacity_kwh);
    const auto efficiencies = axis(grid.efficiency, base.battery.efficiency);

    std::vector<SweepCell> cells;
    for (double p : powers) {
        for (double c : capacities) {
            for (double e : efficiencies) {
                BatterySpec spec = base.battery;
                spec.power_kw = p;
                spec.capacity_kwh = c;
                spec.efficiency = e;
                cells.push_back(SweepCell{spec, std::nullopt, {}});
            }
        }
    }

    std::optional<ScenarioData> data;
    std::string data_error;
    try {
        data = load_scenario_data(base);
    } catch (const Error& e) {
        data_error = e.what();
    }

    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        auto& cell = cells[i];
        if (!data) {
            cell.error = data_error;
            return;
        }
        try {
            ScenarioConfig config = base;
            config.battery = cell.battery;
            if (config.initial_kwh) config.initial_kwh = std::min(*config.initial_kwh, cell.battery.capacity_kwh);
            cell.report = run_scenario(config, *data);
        } catch (const Error& e) {
            cell.error = e.what();
        }
    });
    return cells;
}

std::vector<ComparisonRow> compare_controllers(const ScenarioConfig& config,
                                               std::span<const ControllerKind> controllers, int jobs) {
    const ScenarioData data = load_scenario_data(config);
    std::vector<std::optional<SimulationReport>> reports(controllers.size());
    std::vector<std::string> errors(controllers.size());
    parallel_for(controllers.size(), jobs, [&](std::size_t i) {
        ScenarioConfig row = config;
        row.controller = controllers[i];
        try {
            reports[i] = run_scenario(row, data);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    std::vector<ComparisonRow> rows;
    for (std::size_t i = 0; i < controllers.size(); ++i) {
        if (!reports[i]) throw Error(fmt::format("{} row failed: {}", to_string(controllers[i]), errors[i]));
        rows.push_back({controllers[i], std::move(*reports[i])});
    }
    return rows;
}

ordered_json to_json(const SimulationReport& r) {
    ordered_json j;
    j["scenario_hash"] = r.scenario_hash;
    j["controller"] = r.controller;
    j["forecaster"] = r.forecaster;
    j["objective"] = r.objective;
    j["battery"] = {{"power_kw", r.battery.power_kw},
                    {"capacity_kwh", r.battery.capacity_kwh},
                    {"efficiency", r.battery.efficiency},
                    {"reserve_kwh", r.battery.reserve_kwh}};
    j["mean_peak_reduction_pct"] = r.mean_peak_reduction_pct;
    j["mean_cost_reduction_pct"] = optional_json(r.mean_cost_reduction_pct);
    j["mean_baseline_peak_kw"] = r.mean_baseline_peak_kw;
    j["mean_controlled_peak_kw"] = r.mean_controlled_peak_kw;
    j["solves"] = r.solves;
    j["fallbacks"] = r.fallbacks;
    ordered_json days = ordered_json::array();
    for (const auto& d : r.days) {
        days.push_back({{"date", format_timestamp(d.date).substr(0, 10)},
                        {"baseline_peak_kw", d.baseline_peak_kw},
                        {"controlled_peak_kw", d.controlled_peak_kw},
                        {"peak_reduction_pct", d.peak_reduction_pct},
                        {"baseline_minute_peak_kw", d.baseline_minute_peak_kw},
                        {"controlled_minute_peak_kw", d.controlled_minute_peak_kw},
                        {"baseline_cost", optional_json(d.baseline_cost)},
                        {"controlled_cost", optional_json(d.controlled_cost)},
                        {"cost_reduction_pct", optional_json(d.cost_reduction_pct)},
                        {"baseline_energy_kwh", d.baseline_energy_kwh},
                        {"controlled_energy_kwh", d.controlled_energy_kwh},
                        {"discharged_kwh", d.discharged_kwh},
                        {"charged_kwh", d.charged_kwh},
                        {"min_stored_kwh", d.min_stored_kwh},
                        {"max_stored_kwh", d.max_stored_kwh}});
    }
    j["days"] = std::move(days);
    return j;
}

ordered_json to_json(std::span<const SweepCell> cells) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : cells) {
        ordered_json j;
        j["power_kw"] = c.battery.power_kw;
        j["capacity_kwh"] = c.battery.capacity_kwh;
        j["efficiency"] = c.battery.efficiency;
        if (c.report) {
            j["report"] = to_json(*c.report);
        } else {
            j["error"] = c.error;
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

ordered_json to_json(std::span<const ComparisonRow> rows) {
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows) arr.push_back(to_json(row.report));
    return arr;
}

void write_report_csv(const std::filesystem::path& path, const SimulationReport& r) {
    fmt::memory_buffer buf;
    auto out = std::back_inserter(buf);
    fmt::format_to(out,
                   "date,baseline_peak_kw,controlled_peak_kw,peak_reduction_pct,baseline_minute_peak_kw,"
                   "controlled_minute_peak_kw,baseline_cost,controlled_cost,cost_reduction_pct,min_stored_kwh,"
                   "max_stored_kwh\n");
    for (const auto& d : r.days) {
        fmt::format_to(out, "{},{},{},{},{},{},{},{},{},{},{}\n", format_timestamp(d.date).substr(0, 10),
                       d.baseline_peak_kw, d.controlled_peak_kw, d.peak_reduction_pct, d.baseline_minute_peak_kw,
                       d.controlled_minute_peak_kw, optional_csv(d.baseline_cost), optional_csv(d.controlled_cost),
                       optional_csv(d.cost_reduction_pct), d.min_stored_kwh, d.max_stored_kwh);
    }
    write_text(path, std::string_view(buf.data(), buf.size()));
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepCell> cells) {
    fmt::memory_buffer buf;
    auto out = std::back_inserter(buf);
    fmt::format_to(out, "power_kw,capacity_kwh,efficiency,mean_peak_reduction_pct,mean_cost_reduction_pct,error\n");
    for (const auto& c : cells) {
        fmt::format_to(out, "{},{},{},{},{},{}\n", c.battery.power_kw, c.battery.capacity_kwh, c.battery.efficiency,
                       c.report ? fmt::format("{}", c.report->mean_peak_reduction_pct) : "",
                       c.report ? optional_csv(c.report->mean_cost_reduction_pct) : "", c.error);
    }
    write_text(path, std::string_view(buf.data(), buf.size()));
}

void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows) {
    fmt::memory_buffer buf;
    auto out = std::back_inserter(buf);
    fmt::format_to(out, "controller,objective,mean_peak_reduction_pct,mean_cost_reduction_pct,mean_baseline_peak_kw,"
                        "mean_controlled_peak_kw\n");
    for (const auto& row : rows) {
        const auto& r = row.report;
        fmt::format_to(out, "{},{},{},{},{},{}\n", r.controller, r.objective, r.mean_peak_reduction_pct,
                       optional_csv(r.mean_cost_reduction_pct), r.mean_baseline_peak_kw, r.mean_controlled_peak_kw);
    }
    write_text(path, std::string_view(buf.data(), buf.size()));
}

void write_action_log_csv(const std::filesystem::path& path, std::span<const MinuteRecord> log) {
    fmt::memory_buffer buf;
    auto out = std::back_inserter(buf);
    fmt::format_to(out, "timestamp,action,stored_kwh,target_kw,realized_kw,delta_p_kw\n");
    for (const auto& m : log) {
        fmt::format_to(out, "{},{},{},{},{},{}\n", format_timestamp(m.timestamp), to_string(m.action), m.stored_kwh,
                       m.target_kw, m.realized_kw, m.delta_p_kw);
    }
    write_text(path, std::string_view(buf.data(), buf.size()));
}

void write_profile_csv(const std::filesystem::path& path, const RunTrace& trace) {
    fmt::memory_buffer buf;
    auto out = std::back_inserter(buf);
    fmt::format_to(out, "timestamp,baseline_kw,controlled_kw,stored_kwh\n");
    for (std::size_t i = 0; i < trace.log.size(); ++i) {
        const auto& m = trace.log[i];
        fmt::format_to(out, "{},{},{},{}\n", format_timestamp(m.timestamp), trace.baseline_kw[i], m.realized_kw,
                       m.stored_kwh);
    }
    write_text(path, std::string_view(buf.data(), buf.size()));
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

}  // namespace flexdispatch
