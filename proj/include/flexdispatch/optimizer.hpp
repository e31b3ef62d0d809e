#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "flexdispatch/core_types.hpp"

namespace flexdispatch {

enum class Objective { PeakMin, SpotMin };

std::string_view to_string(Objective o);
Objective parse_objective(std::string_view text);

struct DispatchProblem {
    TimeSeries forecast;                // net consumption at market resolution
    std::optional<TimeSeries> prices;   // required for SpotMin
    BatterySpec spec;
    BatteryState initial;
    Objective objective = Objective::PeakMin;
    // Peak already incurred earlier in the cost period; the PeakMin objective
    // becomes max(peak_floor_kw, planned peak).
    double peak_floor_kw = -std::numeric_limits<double>::infinity();

    /// Throws ConfigError on shape mismatches.
    void validate() const;
    std::size_t horizon() const { return forecast.size(); }
};

struct DispatchSolution {
    std::vector<Action> actions;
    // kW for PeakMin, currency for SpotMin
    double objective_value = 0.0;
    // PeakMin tie-breaker: spot cost when prices are present, else the number
    // of non-idle steps. Zero for SpotMin.
    double secondary_value = 0.0;
    std::vector<BatteryState> trajectory;  // horizon + 1 states
};

/// max_t (forecast_t + b_t * P)
double evaluate_peak(const TimeSeries& forecast, std::span<const Action> actions, const BatterySpec& spec);

/// sum_t (forecast_t + b_t * P) * price_t * dt, accumulated from the last step backwards.
double evaluate_spot(const TimeSeries& forecast, const TimeSeries& prices, std::span<const Action> actions,
                     const BatterySpec& spec);

/// Exact optimum by dynamic programming over the reachable battery states.
/// PeakMin runs a min-max pass, then minimizes the tie-breaker among
/// peak-optimal schedules. Remaining ties go to Idle, then Discharge, then
/// Charge, earliest step first. Throws InfeasibleError if the initial state
/// violates the reserve or the capacity.
DispatchSolution solve_dp(const DispatchProblem& problem);

inline constexpr std::size_t kBruteForceMaxHorizon = 12;

/// Enumerates all 3^T schedules (T <= 12). Same objective ordering and
/// tie-breaking as solve_dp.
DispatchSolution solve_brute_force(const DispatchProblem& problem);

/// States visited by applying `actions` from `initial` at market resolution.
/// Throws InfeasibleError if any step leaves [max(reserve, 0), capacity].
std::vector<BatteryState> simulate_plan(BatteryState initial, std::span<const Action> actions,
                                        const BatterySpec& spec, double step_hours);

}  // namespace flexdispatch
