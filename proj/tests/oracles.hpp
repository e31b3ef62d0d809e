#pragma once

// Reference implementations kept deliberately naive: forward simulation and
// full enumeration, no shared code with the library's solvers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "flexdispatch/core_types.hpp"
#include "flexdispatch/optimizer.hpp"

namespace oracle {

using flexdispatch::Action;

struct Best {
    bool found = false;
    double value = std::numeric_limits<double>::infinity();
    std::vector<Action> actions;
};

inline double stored_after(double s, int b, double power, double eff, double hours) {
    if (b > 0) return s + eff * power * hours;
    if (b < 0) return s - power * hours;
    return s;
}

// Enumerates every schedule as a base-3 counter and keeps the lowest
// objective; feasibility re-simulated from scratch for each candidate.
inline Best enumerate(const std::vector<double>& forecast, const std::vector<double>* prices, double power,
                      double capacity, double eff, double reserve, double initial, bool peak, double hours) {
    const std::size_t n = forecast.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    Best best;
    std::vector<Action> acts(n);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t t = 0; t < n; ++t) {
            acts[t] = static_cast<Action>(static_cast<int>(c % 3) - 1);
            c /= 3;
        }
        double s = initial;
        bool ok = true;
        const double lo = std::max(reserve, 0.0);
        for (std::size_t t = 0; t < n && ok; ++t) {
            s = stored_after(s, static_cast<int>(acts[t]), power, eff, hours);
            ok = s >= lo - 1e-9 && s <= capacity + 1e-9;
        }
        if (!ok) continue;
        double value = 0.0;
        if (peak) {
            value = -std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < n; ++t) value = std::max(value, forecast[t] + static_cast<int>(acts[t]) * power);
        } else {
            for (std::size_t t = 0; t < n; ++t) value += (forecast[t] + static_cast<int>(acts[t]) * power) * (*prices)[t] * hours;
        }
        if (!best.found || value < best.value) {
            best.found = true;
            best.value = value;
            best.actions = acts;
        }
    }
    return best;
}

struct Instance {
    std::vector<double> forecast;
    std::vector<double> prices;
    flexdispatch::BatterySpec spec;
    double initial = 0.0;
};

// Random small instance. Step energy is power/4 (15-min steps).
inline Instance random_instance(std::mt19937_64& rng, std::size_t horizon) {
    std::uniform_real_distribution<double> load(-10.0, 120.0);
    std::uniform_real_distribution<double> price(0.0, 0.3);
    std::uniform_int_distribution<int> pick(0, 3);
    const double powers[] = {5.0, 10.0, 20.0, 40.0};
    const double capacities[] = {2.5, 5.0, 12.5, 20.0};
    const double effs[] = {1.0, 0.9, 0.95, 0.8};
    Instance in;
    for (std::size_t t = 0; t < horizon; ++t) {
        // whole kW values make ties common, which exercises the tie-breaks
        const double v = load(rng);
        in.forecast.push_back(pick(rng) == 0 ? std::round(v) : v);
        in.prices.push_back(pick(rng) == 0 ? 0.1 : price(rng));
    }
    in.spec.power_kw = powers[pick(rng)];
    in.spec.capacity_kwh = std::max(capacities[pick(rng)], in.spec.power_kw * 0.25);
    in.spec.efficiency = effs[pick(rng)];
    in.spec.reserve_kwh = pick(rng) == 0 ? in.spec.capacity_kwh * 0.2 : 0.0;
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    const double lo = in.spec.reserve_kwh;
    in.initial = pick(rng) == 0 ? lo : lo + (in.spec.capacity_kwh - lo) * frac(rng);
    return in;
}

inline flexdispatch::TimeSeries series(const std::vector<double>& v, flexdispatch::Duration res = flexdispatch::kMarketStep) {
    return flexdispatch::TimeSeries(flexdispatch::TimeGrid::make(flexdispatch::Timestamp{}, res, v.size()), v);
}

inline flexdispatch::DispatchProblem problem(const Instance& in, flexdispatch::Objective objective, bool with_prices) {
    flexdispatch::DispatchProblem p;
    p.forecast = series(in.forecast);
    if (with_prices || objective == flexdispatch::Objective::SpotMin) p.prices = series(in.prices);
    p.spec = in.spec;
    p.initial = flexdispatch::BatteryState{in.initial};
    p.objective = objective;
    return p;
}

}  // namespace oracle
