#pragma once

#include <span>

#include "flexdispatch/controller.hpp"

namespace flexdispatch {

// Percentile thresholds without foresight: discharge above the high
// percentile, charge below the low one.
struct RuleConfig {
    double discharge_percentile = 90.0;
    double charge_percentile = 30.0;
    int lookback_days = 1;

    void validate() const;
};

struct RuleThresholds {
    double charge_below = 0.0;
    double discharge_above = 0.0;
};

/// Linear-interpolation percentile, pct in [0, 100].
double percentile(std::span<const double> values, double pct);

/// Thresholds from the last `lookback_days` of 15-min mean net load.
RuleThresholds load_thresholds(const TimeSeries& history, const RuleConfig& config);

/// Thresholds from the day's own (day-ahead known) prices.
RuleThresholds price_thresholds(const TimeSeries& day_prices, const RuleConfig& config);

/// Memoryless rule. `signal` is the current minute load (peak mode) or the
/// current price (spot mode). Infeasible choices degrade to Idle.
Action rule_based_step(double signal, const RuleThresholds& thresholds, BatteryState state, const BatterySpec& spec);

DayRun run_rule_day(const DayInputs& day, Objective objective, const RuleConfig& config, const BatterySpec& spec,
                    BatteryState initial);

}  // namespace flexdispatch
