#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "flexdispatch/core_types.hpp"
#include "flexdispatch/forecasting.hpp"
#include "flexdispatch/optimizer.hpp"

namespace flexdispatch {

enum class ReplanCadence { EveryMinute, EveryMarketStep };

std::string_view to_string(ReplanCadence c);
ReplanCadence parse_replan(std::string_view text);

struct ControllerConfig {
    // Dead band as a fraction of battery power: |dP| < phi * P keeps the battery idle.
    double tolerance_phi = 0.1;
    ReplanCadence replan = ReplanCadence::EveryMarketStep;

    void validate() const;
};

struct ConsumptionPlan {
    TimeSeries target_kw;
};

/// target_t = forecast_t + b_t * P
ConsumptionPlan build_plan(const TimeSeries& forecast, std::span<const Action> actions, const BatterySpec& spec);

/// Running mean of the realized minute powers in the current market step minus the target.
double tracking_error(std::span<const double> realized_minutes, double target_kw);

/// Dead-band rule. Actions the battery cannot sustain for one more minute
/// degrade to Idle; the reserve is not enforced here, only [0, capacity].
Action decide_action(double delta_p_kw, const ControllerConfig& config, BatteryState state, const BatterySpec& spec);

struct MinuteRecord {
    Timestamp timestamp;
    Action action = Action::Idle;
    double stored_kwh = 0.0;  // after the minute
    double target_kw = 0.0;
    double realized_kw = 0.0;
    double delta_p_kw = 0.0;
};

struct DayInputs {
    TimeSeries baseline;                 // one cost period of minute net load
    std::optional<TimeSeries> prices;    // market resolution, same day
    TimeSeries history;                  // market-resolution actuals before the day
};

struct DayRun {
    std::vector<MinuteRecord> log;
    TimeSeries realized;                 // minute net load with the battery
    BatteryState final_state;
    std::size_t solves = 0;
    std::size_t fallbacks = 0;           // replans that kept the previous plan
};

using Solver = std::function<DispatchSolution(const DispatchProblem&)>;

/// Closed-loop tracking of an optimized plan over one cost period.
///
/// The forecaster runs once at the start of the day; the optimizer reruns on
/// the remaining steps at the configured cadence from the measured battery
/// state, with the peak realized so far as a floor. Each minute the tracking
/// error uses the realized minutes of the current step plus the current
/// minute's measured load, then the dead-band rule picks the action.
DayRun run_control_loop(const DayInputs& day, const Forecaster& forecaster, const Solver& solver,
                        Objective objective, const BatterySpec& spec, BatteryState initial,
                        const ControllerConfig& config);

}  // namespace flexdispatch
