#include "flexdispatch/core_types.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include <fmt/chrono.h>
#include <fmt/format.h>

namespace flexdispatch {

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) return false;
    const char* first = text.data() + pos;
    const char* last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

double to_hours(Duration d) {
    return std::chrono::duration<double, std::ratio<3600>>(d).count();
}

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    // 2018-05-07T06:45:00Z
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    bool ok = text.size() >= 16 && text[4] == '-' && text[7] == '-' &&
              (text[10] == 'T' || text[10] == ' ') && text[13] == ':' && read_int(text, 0, 4, y) &&
              read_int(text, 5, 2, mo) && read_int(text, 8, 2, d) && read_int(text, 11, 2, h) &&
              read_int(text, 14, 2, mi);
    std::size_t pos = 16;
    if (ok && pos < text.size() && text[pos] == ':') {
        ok = read_int(text, pos + 1, 2, s);
        pos += 3;
    }
    if (ok && pos < text.size() && text[pos] == 'Z') ++pos;
    ok = ok && pos == text.size();
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ok || !ymd.ok() || h > 23 || mi > 59 || s > 59) {
        throw DataError(fmt::format("invalid ISO-8601 timestamp '{}'", text));
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp ts) {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", ts);
}

Timestamp day_start(Timestamp ts) {
    return std::chrono::floor<std::chrono::days>(ts);
}

TimeGrid TimeGrid::make(Timestamp start, Duration resolution, std::size_t steps) {
    if (resolution <= Duration::zero()) throw ConfigError("time grid resolution must be positive");
    if (kCostPeriod % resolution != Duration::zero()) {
        throw ConfigError(fmt::format("resolution of {} s does not divide 24 h", resolution.count()));
    }
    if (steps == 0) throw ConfigError("time grid must have at least one step");
    return TimeGrid{start, resolution, steps};
}

std::optional<std::size_t> TimeGrid::index_of(Timestamp ts) const {
    if (ts < start) return std::nullopt;
    const auto offset = ts - start;
    if (offset % resolution != Duration::zero()) return std::nullopt;
    const auto idx = static_cast<std::size_t>(offset / resolution);
    if (idx >= steps) return std::nullopt;
    return idx;
}

TimeSeries::TimeSeries(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.steps) {
        throw ConfigError(fmt::format("series has {} values but grid has {} steps", values_.size(), grid_.steps));
    }
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const {
    if (first + count > values_.size() || count == 0) {
        throw ConfigError(fmt::format("slice [{}, {}) out of range for {} values", first, first + count, values_.size()));
    }
    TimeGrid g{grid_.at(first), grid_.resolution, count};
    return TimeSeries(g, {values_.begin() + static_cast<long>(first), values_.begin() + static_cast<long>(first + count)});
}

TimeSeries TimeSeries::window(Timestamp from, Timestamp to) const {
    if (to <= from || from < start() || to > end() || (from - start()) % resolution() != Duration::zero() ||
        (to - from) % resolution() != Duration::zero()) {
        throw DataError(fmt::format("window [{}, {}) is not covered by series [{}, {})", format_timestamp(from),
                                    format_timestamp(to), format_timestamp(start()), format_timestamp(end())));
    }
    return slice(static_cast<std::size_t>((from - start()) / resolution()),
                 static_cast<std::size_t>((to - from) / resolution()));
}

double TimeSeries::max() const {
    return *std::max_element(values_.begin(), values_.end());
}

double TimeSeries::mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

void BatterySpec::validate() const {
    if (!(power_kw >= 0.0)) throw ConfigError("battery power_kw must be non-negative");
    if (!(capacity_kwh >= 0.0)) throw ConfigError("battery capacity_kwh must be non-negative");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ConfigError("battery efficiency must be in (0, 1]");
    if (!(reserve_kwh >= 0.0 && reserve_kwh <= capacity_kwh)) {
        throw ConfigError("battery reserve_kwh must be in [0, capacity_kwh]");
    }
}

std::string_view to_string(Action a) {
    switch (a) {
        case Action::Discharge: return "discharge";
        case Action::Idle: return "idle";
        case Action::Charge: return "charge";
    }
    return "idle";
}

Action parse_action(std::string_view text) {
    if (text == "discharge" || text == "-1") return Action::Discharge;
    if (text == "idle" || text == "0") return Action::Idle;
    if (text == "charge" || text == "1") return Action::Charge;
    throw DataError(fmt::format("unknown action '{}'", text));
}

double stored_after(BatteryState state, Action action, const BatterySpec& spec, double hours) {
    switch (action) {
        case Action::Charge: return state.stored_kwh + spec.efficiency * spec.power_kw * hours;
        case Action::Discharge: return state.stored_kwh - spec.power_kw * hours;
        case Action::Idle: break;
    }
    return state.stored_kwh;
}

bool can_apply(BatteryState state, Action action, const BatterySpec& spec, double hours) {
    const double next = stored_after(state, action, spec, hours);
    return next >= -kEnergyTolerance && next <= spec.capacity_kwh + kEnergyTolerance;
}

BatteryStep step_battery(BatteryState state, Action action, const BatterySpec& spec, double hours) {
    if (action == Action::Idle) return {state, 0.0};
    const double next = stored_after(state, action, spec, hours);
    if (next > spec.capacity_kwh + kEnergyTolerance) {
        throw InfeasibleError(fmt::format("charge would exceed capacity: {} kWh > {} kWh", next, spec.capacity_kwh));
    }
    if (next < -kEnergyTolerance) {
        throw InfeasibleError(fmt::format("discharge would drop below empty: {} kWh < 0 kWh", next));
    }
    const double clamped = std::clamp(next, 0.0, spec.capacity_kwh);
    return {BatteryState{clamped}, sign(action) * spec.power_kw};
}

}  // namespace flexdispatch
