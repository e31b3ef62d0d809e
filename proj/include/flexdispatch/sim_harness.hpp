#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "flexdispatch/scenario.hpp"

namespace flexdispatch {

/// Input corpus for a scenario: minute net load, its 15-min means, prices.
struct ScenarioData {
    TimeSeries load;                   // minute resolution, whole days from midnight
    TimeSeries market;                 // 15-min means of `load`
    std::optional<TimeSeries> prices;  // 15-min, covers `load`

    std::size_t total_days() const { return load.size() / load.grid().steps_per_day(); }
};

/// Loads the CSVs named by the config or runs the synthetic generators.
ScenarioData load_scenario_data(const ScenarioConfig& config);

struct DayRecord {
    Timestamp date;
    double baseline_peak_kw = 0.0;       // max 15-min mean
    double controlled_peak_kw = 0.0;
    double peak_reduction_pct = 0.0;
    double baseline_minute_peak_kw = 0.0;
    double controlled_minute_peak_kw = 0.0;
    std::optional<double> baseline_cost;
    std::optional<double> controlled_cost;
    std::optional<double> cost_reduction_pct;
    double baseline_energy_kwh = 0.0;
    double controlled_energy_kwh = 0.0;
    double discharged_kwh = 0.0;         // grid-side
    double charged_kwh = 0.0;            // grid-side
    double min_stored_kwh = 0.0;
    double max_stored_kwh = 0.0;
};

struct SimulationReport {
    std::string scenario_hash;
    std::string controller;
    std::string forecaster;
    std::string objective;
    BatterySpec battery;
    std::vector<DayRecord> days;
    double mean_peak_reduction_pct = 0.0;
    std::optional<double> mean_cost_reduction_pct;
    double mean_baseline_peak_kw = 0.0;
    double mean_controlled_peak_kw = 0.0;
    std::size_t solves = 0;
    std::size_t fallbacks = 0;
};

/// Minute-level detail of a run, for plot-ready output.
struct RunTrace {
    std::vector<MinuteRecord> log;
    std::vector<double> baseline_kw;
};

SimulationReport run_scenario(const ScenarioConfig& config);
SimulationReport run_scenario(const ScenarioConfig& config, const ScenarioData& data, RunTrace* trace = nullptr);

struct SweepGrid {
    std::vector<double> power_kw;
    std::vector<double> capacity_kwh;
    std::vector<double> efficiency;
};

struct SweepCell {
    BatterySpec battery;
    std::optional<SimulationReport> report;
    std::string error;
};

/// Cartesian product power x capacity x efficiency (empty axes keep the base
/// value). A failing cell records its error and the sweep continues.
std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const SweepGrid& grid, int jobs = 1);

struct ComparisonRow {
    ControllerKind controller;
    SimulationReport report;
};

inline constexpr ControllerKind kDefaultComparison[] = {ControllerKind::Optimal, ControllerKind::Mpc,
                                                        ControllerKind::Rule, ControllerKind::None};

/// Same corpus and battery for every row; "optimal" is MPC fed the actuals.
std::vector<ComparisonRow> compare_controllers(const ScenarioConfig& config,
                                               std::span<const ControllerKind> controllers = kDefaultComparison,
                                               int jobs = 1);

nlohmann::ordered_json to_json(const SimulationReport& report);
nlohmann::ordered_json to_json(std::span<const SweepCell> cells);
nlohmann::ordered_json to_json(std::span<const ComparisonRow> rows);

void write_report_csv(const std::filesystem::path& path, const SimulationReport& report);
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepCell> cells);
void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows);
/// `timestamp,action,stored_kwh,target_kw,realized_kw,delta_p_kw`
void write_action_log_csv(const std::filesystem::path& path, std::span<const MinuteRecord> log);
/// Per-minute baseline vs controlled load and battery level.
void write_profile_csv(const std::filesystem::path& path, const RunTrace& trace);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

}  // namespace flexdispatch
