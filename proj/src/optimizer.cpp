#include "flexdispatch/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace flexdispatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Preference order for ties.
constexpr std::array<Action, 3> kActionOrder{Action::Idle, Action::Discharge, Action::Charge};

// Battery level after `charges` charge steps and `discharges` discharge steps.
// With unit efficiency only the net count matters, so counts are normalized to
// (net, 0) and both solvers evaluate the exact same expression.
struct Counts {
    int charges = 0;
    int discharges = 0;
};

class Lattice {
public:
    Lattice(const BatterySpec& spec, double step_hours, double initial_kwh)
        : initial_(initial_kwh),
          step_kwh_(spec.step_energy_kwh(step_hours)),
          charge_kwh_(spec.efficiency * spec.step_energy_kwh(step_hours)),
          unit_efficiency_(spec.efficiency == 1.0),
          lower_(std::max(spec.reserve_kwh, 0.0) - kEnergyTolerance),
          upper_(spec.capacity_kwh + kEnergyTolerance) {}

    Counts apply(Counts c, Action a) const {
        if (a == Action::Charge) ++c.charges;
        if (a == Action::Discharge) ++c.discharges;
        if (unit_efficiency_) {
            c.charges -= c.discharges;
            c.discharges = 0;
        }
        return c;
    }

    double energy(Counts c) const {
        if (unit_efficiency_) return initial_ + c.charges * step_kwh_;
        return initial_ + c.charges * charge_kwh_ - c.discharges * step_kwh_;
    }

    bool feasible(double kwh) const { return kwh >= lower_ && kwh <= upper_; }

private:
    double initial_;
    double step_kwh_;
    double charge_kwh_;
    bool unit_efficiency_;
    double lower_;
    double upper_;
};

// Shared per-step terms so the DP and the enumeration round identically.
struct StepTerms {
    const DispatchProblem& problem;
    double hours;

    double load(std::size_t t, Action a) const {
        return problem.forecast[t] + sign(a) * problem.spec.power_kw;
    }
    double spot(std::size_t t, Action a) const {
        return load(t, a) * (*problem.prices)[t] * hours;
    }
    // Additive term minimized by the second pass.
    double additive(std::size_t t, Action a) const {
        if (problem.objective == Objective::SpotMin || problem.prices) return spot(t, a);
        return a == Action::Idle ? 0.0 : 1.0;
    }
};

void check_initial(const DispatchProblem& p) {
    const double s1 = p.initial.stored_kwh;
    if (s1 < p.spec.reserve_kwh - kEnergyTolerance) {
        throw InfeasibleError(fmt::format("initial stored energy {} kWh is below the reserve {} kWh", s1,
                                          p.spec.reserve_kwh));
    }
    if (s1 < -kEnergyTolerance || s1 > p.spec.capacity_kwh + kEnergyTolerance) {
        throw InfeasibleError(fmt::format("initial stored energy {} kWh is outside [0, {}] kWh", s1,
                                          p.spec.capacity_kwh));
    }
}

DispatchSolution finish(const DispatchProblem& p, std::vector<Action> actions, double secondary) {
    DispatchSolution sol;
    sol.trajectory = simulate_plan(p.initial, actions, p.spec, p.forecast.grid().step_hours());
    if (p.objective == Objective::PeakMin) {
        sol.objective_value = std::max(p.peak_floor_kw, evaluate_peak(p.forecast, actions, p.spec));
        sol.secondary_value = secondary;
    } else {
        sol.objective_value = evaluate_spot(p.forecast, *p.prices, actions, p.spec);
    }
    sol.actions = std::move(actions);
    return sol;
}

struct Node {
    Counts counts;
    std::array<int, 3> next{-1, -1, -1};  // indexed like kActionOrder
};

}  // namespace

std::string_view to_string(Objective o) {
    return o == Objective::PeakMin ? "peak" : "spot";
}

Objective parse_objective(std::string_view text) {
    if (text == "peak") return Objective::PeakMin;
    if (text == "spot") return Objective::SpotMin;
    throw ConfigError(fmt::format("unknown objective '{}' (expected peak|spot)", text));
}

void DispatchProblem::validate() const {
    spec.validate();
    if (forecast.empty()) throw ConfigError("forecast is empty");
    if (objective == Objective::SpotMin && !prices) throw ConfigError("spot objective requires prices");
    if (prices) {
        if (prices->size() != forecast.size()) {
            throw ConfigError(fmt::format("prices have {} steps but forecast has {}", prices->size(), forecast.size()));
        }
        if (prices->resolution() != forecast.resolution()) {
            throw ConfigError("prices and forecast resolutions differ");
        }
    }
}

double evaluate_peak(const TimeSeries& forecast, std::span<const Action> actions, const BatterySpec& spec) {
    if (actions.size() != forecast.size()) {
        throw ConfigError(fmt::format("{} actions for a forecast of {} steps", actions.size(), forecast.size()));
    }
    double peak = -kInf;
    for (std::size_t t = 0; t < actions.size(); ++t) {
        peak = std::max(peak, forecast[t] + sign(actions[t]) * spec.power_kw);
    }
    return peak;
}

double evaluate_spot(const TimeSeries& forecast, const TimeSeries& prices, std::span<const Action> actions,
                     const BatterySpec& spec) {
    if (actions.size() != forecast.size() || prices.size() != forecast.size()) {
        throw ConfigError(fmt::format("length mismatch: {} actions, {} forecast steps, {} prices", actions.size(),
                                      forecast.size(), prices.size()));
    }
    const double hours = forecast.grid().step_hours();
    double total = 0.0;
    for (std::size_t t = actions.size(); t-- > 0;) {
        total = (forecast[t] + sign(actions[t]) * spec.power_kw) * prices[t] * hours + total;
    }
    return total;
}

std::vector<BatteryState> simulate_plan(BatteryState initial, std::span<const Action> actions,
                                        const BatterySpec& spec, double step_hours) {
    const Lattice lattice(spec, step_hours, initial.stored_kwh);
    std::vector<BatteryState> states;
    states.reserve(actions.size() + 1);
    states.push_back(initial);
    Counts c;
    for (std::size_t t = 0; t < actions.size(); ++t) {
        c = lattice.apply(c, actions[t]);
        const double kwh = lattice.energy(c);
        if (!lattice.feasible(kwh)) {
            throw InfeasibleError(fmt::format("step {}: stored energy {} kWh outside [{}, {}] kWh", t + 1, kwh,
                                              std::max(spec.reserve_kwh, 0.0), spec.capacity_kwh));
        }
        states.push_back(BatteryState{std::clamp(kwh, 0.0, spec.capacity_kwh)});
    }
    return states;
}

DispatchSolution solve_dp(const DispatchProblem& p) {
    p.validate();
    check_initial(p);

    const std::size_t horizon = p.horizon();
    const double hours = p.forecast.grid().step_hours();
    const Lattice lattice(p.spec, hours, p.initial.stored_kwh);
    const StepTerms terms{p, hours};
    const int span = static_cast<int>(horizon);

    // Forward pass: reachable states per step, deduplicated by normalized counts.
    std::vector<std::vector<Node>> layers(horizon + 1);
    layers[0].push_back(Node{});
    const auto slot = [span](Counts c) {
        return static_cast<std::size_t>((c.charges + span) * (span + 1) + c.discharges);
    };
    std::vector<int> index((2 * horizon + 1) * (horizon + 1), -1);
    for (std::size_t t = 0; t < horizon; ++t) {
        auto& next_layer = layers[t + 1];
        for (auto& node : layers[t]) {
            for (std::size_t k = 0; k < kActionOrder.size(); ++k) {
                const Counts c = lattice.apply(node.counts, kActionOrder[k]);
                if (!lattice.feasible(lattice.energy(c))) continue;
                int& idx = index[slot(c)];
                if (idx < 0) {
                    idx = static_cast<int>(next_layer.size());
                    next_layer.push_back(Node{c});
                }
                node.next[k] = idx;
            }
        }
        for (const auto& node : next_layer) index[slot(node.counts)] = -1;
    }

    // PeakMin: min-max pass fixes the optimal peak.
    double bound = kInf;
    if (p.objective == Objective::PeakMin) {
        std::vector<double> after(layers[horizon].size(), -kInf);
        for (std::size_t t = horizon; t-- > 0;) {
            std::vector<double> here(layers[t].size(), kInf);
            for (std::size_t i = 0; i < layers[t].size(); ++i) {
                for (std::size_t k = 0; k < kActionOrder.size(); ++k) {
                    const int j = layers[t][i].next[k];
                    if (j < 0) continue;
                    here[i] = std::min(here[i], std::max(terms.load(t, kActionOrder[k]), after[static_cast<std::size_t>(j)]));
                }
            }
            after = std::move(here);
        }
        bound = std::max(after[0], p.peak_floor_kw);
    }

    // Additive pass, restricted to steps that stay within the optimal peak.
    std::vector<std::vector<double>> value(horizon + 1);
    value[horizon].assign(layers[horizon].size(), 0.0);
    for (std::size_t t = horizon; t-- > 0;) {
        auto& here = value[t];
        here.assign(layers[t].size(), kInf);
        for (std::size_t i = 0; i < layers[t].size(); ++i) {
            for (std::size_t k = 0; k < kActionOrder.size(); ++k) {
                const int j = layers[t][i].next[k];
                if (j < 0 || !(terms.load(t, kActionOrder[k]) <= bound)) continue;
                here[i] = std::min(here[i], terms.additive(t, kActionOrder[k]) + value[t + 1][static_cast<std::size_t>(j)]);
            }
        }
    }

    std::vector<Action> actions;
    actions.reserve(horizon);
    std::size_t i = 0;
    for (std::size_t t = 0; t < horizon; ++t) {
        bool picked = false;
        for (std::size_t k = 0; k < kActionOrder.size() && !picked; ++k) {
            const int j = layers[t][i].next[k];
            if (j < 0 || !(terms.load(t, kActionOrder[k]) <= bound)) continue;
            if (terms.additive(t, kActionOrder[k]) + value[t + 1][static_cast<std::size_t>(j)] == value[t][i]) {
                actions.push_back(kActionOrder[k]);
                i = static_cast<std::size_t>(j);
                picked = true;
            }
        }
        if (!picked) throw Error(fmt::format("dynamic program lost the optimal path at step {}", t + 1));
    }
    return finish(p, std::move(actions), p.objective == Objective::PeakMin ? value[0][0] : 0.0);
}

DispatchSolution solve_brute_force(const DispatchProblem& p) {
    p.validate();
    const std::size_t horizon = p.horizon();
    if (horizon > kBruteForceMaxHorizon) {
        throw ConfigError(fmt::format("brute force supports horizons up to {} steps, got {}", kBruteForceMaxHorizon,
                                      horizon));
    }
    check_initial(p);

    const double hours = p.forecast.grid().step_hours();
    const Lattice lattice(p.spec, hours, p.initial.stored_kwh);
    const StepTerms terms{p, hours};

    std::vector<Action> current(horizon, Action::Idle);
    std::vector<Action> best;
    double best_primary = kInf;
    double best_secondary = kInf;

    // Depth-first in preference order; only strict improvements replace the
    // incumbent so the first optimum found wins ties.
    const auto visit = [&](auto&& self, std::size_t t, Counts counts) -> void {
        if (t == horizon) {
            double additive = 0.0;
            for (std::size_t s = horizon; s-- > 0;) additive = terms.additive(s, current[s]) + additive;
            if (p.objective == Objective::PeakMin) {
                double peak = -kInf;
                for (std::size_t s = 0; s < horizon; ++s) peak = std::max(peak, terms.load(s, current[s]));
                const double primary = std::max(p.peak_floor_kw, peak);
                if (primary < best_primary || (primary == best_primary && additive < best_secondary)) {
                    best_primary = primary;
                    best_secondary = additive;
                    best = current;
                }
            } else if (additive < best_primary) {
                best_primary = additive;
                best = current;
            }
            return;
        }
        for (Action a : kActionOrder) {
            const Counts next = lattice.apply(counts, a);
            if (!lattice.feasible(lattice.energy(next))) continue;
            current[t] = a;
            self(self, t + 1, next);
        }
    };
    visit(visit, 0, Counts{});

    return finish(p, std::move(best), p.objective == Objective::PeakMin ? best_secondary : 0.0);
}

}  // namespace flexdispatch
