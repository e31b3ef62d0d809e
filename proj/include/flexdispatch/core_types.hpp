#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flexdispatch {

using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

inline constexpr Duration kMinute{60};
inline constexpr Duration kMarketStep{15 * 60};
inline constexpr Duration kCostPeriod{24 * 60 * 60};

// Slack used when comparing stored energy against the battery bounds.
inline constexpr double kEnergyTolerance = 1e-9;

// Error taxonomy. The CLI maps these onto exit codes 1/2/3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

double to_hours(Duration d);

/// Parses `YYYY-MM-DDTHH:MM[:SS][Z]` (UTC). Throws DataError.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

/// Midnight (UTC) of the day containing `ts`.
Timestamp day_start(Timestamp ts);

struct TimeGrid {
    Timestamp start{};
    Duration resolution{kMarketStep};
    std::size_t steps = 0;

    /// Throws ConfigError unless resolution > 0, steps > 0 and resolution divides 24 h.
    static TimeGrid make(Timestamp start, Duration resolution, std::size_t steps);

    Timestamp at(std::size_t i) const { return start + resolution * static_cast<long>(i); }
    Timestamp end() const { return at(steps); }
    double step_hours() const { return to_hours(resolution); }
    std::size_t steps_per_day() const { return static_cast<std::size_t>(kCostPeriod / resolution); }
    /// Index of `ts` if it lies exactly on the grid.
    std::optional<std::size_t> index_of(Timestamp ts) const;

    bool operator==(const TimeGrid&) const = default;
};

/// Uniformly sampled values: kW for power, currency/kWh for prices.
class TimeSeries {
public:
    TimeSeries() = default;
    TimeSeries(TimeGrid grid, std::vector<double> values);

    const TimeGrid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    Duration resolution() const { return grid_.resolution; }
    Timestamp start() const { return grid_.start; }
    Timestamp end() const { return grid_.end(); }

    TimeSeries slice(std::size_t first, std::size_t count) const;
    /// Sub-series covering [from, to); both ends must lie on the grid.
    TimeSeries window(Timestamp from, Timestamp to) const;
    double max() const;
    double mean() const;

private:
    TimeGrid grid_{};
    std::vector<double> values_;
};

struct BatterySpec {
    double power_kw = 20.0;     // symmetric charge/discharge rating
    double capacity_kwh = 20.0;
    double efficiency = 1.0;    // charge-side
    double reserve_kwh = 0.0;   // planning floor

    void validate() const;
    /// Energy moved through the grid connection in one step at full power.
    double step_energy_kwh(double hours) const { return power_kw * hours; }

    bool operator==(const BatterySpec&) const = default;
};

struct BatteryState {
    double stored_kwh = 0.0;
    bool operator==(const BatteryState&) const = default;
};

enum class Action : int { Discharge = -1, Idle = 0, Charge = 1 };

inline int sign(Action a) { return static_cast<int>(a); }
std::string_view to_string(Action a);
Action parse_action(std::string_view text);

struct BatteryStep {
    BatteryState state;
    double grid_delta_kw = 0.0;
};

/// Stored energy after applying `action` for `hours`; no bounds checking.
double stored_after(BatteryState state, Action action, const BatterySpec& spec, double hours);

/// True if `action` keeps the stored energy inside [0, capacity].
bool can_apply(BatteryState state, Action action, const BatterySpec& spec, double hours);

/// Applies one action for `hours`. Losses are taken on the charge side only.
/// Throws InfeasibleError if the action would leave [0, capacity].
BatteryStep step_battery(BatteryState state, Action action, const BatterySpec& spec, double hours);

}  // namespace flexdispatch
