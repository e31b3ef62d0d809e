#include "flexdispatch/controller.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace flexdispatch {

std::string_view to_string(ReplanCadence c) {
    return c == ReplanCadence::EveryMinute ? "minute" : "market-step";
}

ReplanCadence parse_replan(std::string_view text) {
    if (text == "minute" || text == "every-minute") return ReplanCadence::EveryMinute;
    if (text == "market-step" || text == "step" || text == "every-market-step") return ReplanCadence::EveryMarketStep;
    throw ConfigError(fmt::format("unknown replan cadence '{}' (expected minute|market-step)", text));
}

void ControllerConfig::validate() const {
    if (!(tolerance_phi >= 0.0 && tolerance_phi <= 1.0)) throw ConfigError("tolerance phi must be in [0, 1]");
}

ConsumptionPlan build_plan(const TimeSeries& forecast, std::span<const Action> actions, const BatterySpec& spec) {
    if (actions.size() != forecast.size()) {
        throw ConfigError(fmt::format("{} actions for a forecast of {} steps", actions.size(), forecast.size()));
    }
    std::vector<double> target(forecast.size());
    for (std::size_t t = 0; t < target.size(); ++t) target[t] = forecast[t] + sign(actions[t]) * spec.power_kw;
    return ConsumptionPlan{TimeSeries(forecast.grid(), std::move(target))};
}

double tracking_error(std::span<const double> realized_minutes, double target_kw) {
    if (realized_minutes.empty()) throw ConfigError("tracking error needs at least one realized minute");
    const double sum = std::accumulate(realized_minutes.begin(), realized_minutes.end(), 0.0);
    return sum / static_cast<double>(realized_minutes.size()) - target_kw;
}

Action decide_action(double delta_p_kw, const ControllerConfig& config, BatteryState state, const BatterySpec& spec) {
    Action a = Action::Idle;
    if (std::abs(delta_p_kw) < config.tolerance_phi * spec.power_kw) {
        a = Action::Idle;
    } else if (delta_p_kw > 0.0) {
        a = Action::Discharge;
    } else if (delta_p_kw < 0.0) {
        a = Action::Charge;
    }
    if (a != Action::Idle && (spec.power_kw <= 0.0 || !can_apply(state, a, spec, to_hours(kMinute)))) {
        return Action::Idle;
    }
    return a;
}

DayRun run_control_loop(const DayInputs& day, const Forecaster& forecaster, const Solver& solver,
                        Objective objective, const BatterySpec& spec, BatteryState initial,
                        const ControllerConfig& config) {
    config.validate();
    spec.validate();
    const TimeSeries& baseline = day.baseline;
    if (baseline.resolution() != kMinute) throw ConfigError("control loop needs minute-resolution load");
    constexpr std::size_t minutes_per_step = static_cast<std::size_t>(kMarketStep / kMinute);
    if (baseline.empty() || baseline.size() % minutes_per_step != 0) {
        throw ConfigError("control loop needs whole market steps of minute data");
    }
    const std::size_t steps = baseline.size() / minutes_per_step;
    const TimeGrid horizon{baseline.start(), kMarketStep, steps};
    if (objective == Objective::SpotMin && !day.prices) throw ConfigError("spot objective requires prices");
    if (day.prices && (day.prices->grid() != horizon)) throw DataError("day prices do not cover the control day");

    const TimeSeries forecast = forecaster.forecast(day.history, horizon);

    DayRun run;
    std::vector<double> target(forecast.values().begin(), forecast.values().end());
    const auto replan = [&](std::size_t from, BatteryState state, double floor) {
        DispatchProblem problem{forecast.slice(from, steps - from),
                                day.prices ? std::optional<TimeSeries>(day.prices->slice(from, steps - from))
                                           : std::nullopt,
                                spec, state, objective, floor};
        try {
            const DispatchSolution sol = solver(problem);
            ++run.solves;
            for (std::size_t i = 0; i < sol.actions.size(); ++i) {
                target[from + i] = forecast[from + i] + sign(sol.actions[i]) * spec.power_kw;
            }
        } catch (const InfeasibleError&) {
            ++run.fallbacks;
        }
    };

    const double minute_hours = baseline.grid().step_hours();
    BatteryState state = initial;
    double peak_so_far = -std::numeric_limits<double>::infinity();
    std::vector<double> realized(baseline.size());
    run.log.reserve(baseline.size());
    replan(0, state, peak_so_far);

    std::array<double, minutes_per_step> prefix{};
    for (std::size_t k = 0; k < steps; ++k) {
        if (k > 0 && config.replan == ReplanCadence::EveryMarketStep) replan(k, state, peak_so_far);
        double step_sum = 0.0;
        for (std::size_t m = 0; m < minutes_per_step; ++m) {
            const std::size_t idx = k * minutes_per_step + m;
            if (idx > 0 && config.replan == ReplanCadence::EveryMinute) replan(k, state, peak_so_far);
            prefix[m] = baseline[idx];
            const double delta_p = tracking_error(std::span<const double>(prefix.data(), m + 1), target[k]);
            const Action action = decide_action(delta_p, config, state, spec);
            const BatteryStep step = step_battery(state, action, spec, minute_hours);
            state = step.state;
            realized[idx] = baseline[idx] + step.grid_delta_kw;
            prefix[m] = realized[idx];
            step_sum += realized[idx];
            run.log.push_back({baseline.grid().at(idx), action, state.stored_kwh, target[k], realized[idx], delta_p});
        }
        peak_so_far = std::max(peak_so_far, step_sum / static_cast<double>(minutes_per_step));
    }
    run.realized = TimeSeries(baseline.grid(), std::move(realized));
    run.final_state = state;
    return run;
}

}  // namespace flexdispatch
