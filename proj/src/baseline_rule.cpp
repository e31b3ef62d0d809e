#include "flexdispatch/baseline_rule.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace flexdispatch {

void RuleConfig::validate() const {
    if (!(charge_percentile >= 0.0 && discharge_percentile <= 100.0 && charge_percentile < discharge_percentile)) {
        throw ConfigError("rule percentiles must satisfy 0 <= charge < discharge <= 100");
    }
    if (lookback_days < 1) throw ConfigError("rule lookback_days must be >= 1");
}

double percentile(std::span<const double> values, double pct) {
    if (values.empty()) throw ConfigError("percentile of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double rank = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - static_cast<double>(lo));
}

RuleThresholds load_thresholds(const TimeSeries& history, const RuleConfig& config) {
    config.validate();
    const std::size_t window = static_cast<std::size_t>(config.lookback_days) * history.grid().steps_per_day();
    if (history.size() < window) {
        throw DataError(fmt::format("rule baseline needs {} day(s) of history", config.lookback_days));
    }
    const auto recent = history.values().subspan(history.size() - window);
    return {percentile(recent, config.charge_percentile), percentile(recent, config.discharge_percentile)};
}

RuleThresholds price_thresholds(const TimeSeries& day_prices, const RuleConfig& config) {
    config.validate();
    return {percentile(day_prices.values(), config.charge_percentile),
            percentile(day_prices.values(), config.discharge_percentile)};
}

Action rule_based_step(double signal, const RuleThresholds& thresholds, BatteryState state, const BatterySpec& spec) {
    Action a = Action::Idle;
    if (signal > thresholds.discharge_above) {
        a = Action::Discharge;
    } else if (signal < thresholds.charge_below) {
        a = Action::Charge;
    }
    if (a != Action::Idle && (spec.power_kw <= 0.0 || !can_apply(state, a, spec, to_hours(kMinute)))) {
        return Action::Idle;
    }
    return a;
}

DayRun run_rule_day(const DayInputs& day, Objective objective, const RuleConfig& config, const BatterySpec& spec,
                    BatteryState initial) {
    spec.validate();
    const TimeSeries& baseline = day.baseline;
    if (baseline.resolution() != kMinute) throw ConfigError("rule baseline needs minute-resolution load");
    constexpr std::size_t minutes_per_step = static_cast<std::size_t>(kMarketStep / kMinute);
    if (objective == Objective::SpotMin && !day.prices) throw ConfigError("spot objective requires prices");

    const RuleThresholds thresholds =
        objective == Objective::SpotMin ? price_thresholds(*day.prices, config) : load_thresholds(day.history, config);

    DayRun run;
    BatteryState state = initial;
    std::vector<double> realized(baseline.size());
    run.log.reserve(baseline.size());
    const double minute_hours = baseline.grid().step_hours();
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        const double signal = objective == Objective::SpotMin ? (*day.prices)[i / minutes_per_step] : baseline[i];
        const Action action = rule_based_step(signal, thresholds, state, spec);
        const BatteryStep step = step_battery(state, action, spec, minute_hours);
        state = step.state;
        realized[i] = baseline[i] + step.grid_delta_kw;
        run.log.push_back({baseline.grid().at(i), action, state.stored_kwh, baseline[i], realized[i], 0.0});
    }
    run.realized = TimeSeries(baseline.grid(), std::move(realized));
    run.final_state = state;
    return run;
}

}  // namespace flexdispatch
