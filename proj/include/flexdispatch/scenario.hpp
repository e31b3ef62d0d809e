#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "flexdispatch/baseline_rule.hpp"
#include "flexdispatch/controller.hpp"
#include "flexdispatch/data_io.hpp"
#include "flexdispatch/optimizer.hpp"
#include "flexdispatch/synthetic.hpp"

namespace flexdispatch {

enum class ControllerKind { None, Rule, Mpc, Optimal };
enum class ForecasterKind { Perfect, Persistence, SeasonalNaive, External };

std::string_view to_string(ControllerKind k);
ControllerKind parse_controller(std::string_view text);
std::string_view to_string(ForecasterKind k);
ForecasterKind parse_forecaster(std::string_view text);

struct DataSource {
    // Empty paths select the synthetic generators.
    std::string load_csv;
    std::string price_csv;
    GapPolicy fill = GapPolicy::Error;
    StoreProfileConfig synthetic;   // rng_seed is taken from ScenarioConfig::seed
    PriceProfileConfig price;       // seed derived from ScenarioConfig::seed, start follows synthetic
};

/// Everything needed to reproduce one simulation run.
///
/// JSON layout (unknown keys are rejected):
///   { "seed", "objective", "days", "warmup_days", "initial_kwh",
///     "battery":    { "power_kw", "capacity_kwh", "efficiency", "reserve_kwh" },
///     "controller": { "type", "phi", "replan" },
///     "rule":       { "discharge_percentile", "charge_percentile", "lookback_days" },
///     "forecaster": { "type", "path" },
///     "data":       { "load_csv", "price_csv", "fill", "synthetic": {...}, "price": {...} } }
struct ScenarioConfig {
    DataSource data;
    int days = 30;          // scored days; <= 0 takes every day a CSV provides
    int warmup_days = 7;    // history before the first scored day
    BatterySpec battery;
    std::optional<double> initial_kwh;  // default: half the capacity
    ControllerKind controller = ControllerKind::Mpc;
    ControllerConfig control;
    RuleConfig rule;
    ForecasterKind forecaster = ForecasterKind::SeasonalNaive;
    std::string forecast_csv;
    Objective objective = Objective::PeakMin;
    std::uint64_t seed = 7;

    void validate() const;
    double initial_stored_kwh() const;
    /// Hex digest of the canonical JSON form.
    std::string hash() const;
};

nlohmann::ordered_json to_json(const ScenarioConfig& config);
/// Reads on top of `base`; only keys present in `j` change. Throws ConfigError.
ScenarioConfig scenario_from_json(const nlohmann::json& j, ScenarioConfig base = {});

/// Seeds used for the synthetic load and price streams.
std::uint64_t load_seed(std::uint64_t seed);
std::uint64_t price_seed(std::uint64_t seed);

}  // namespace flexdispatch
