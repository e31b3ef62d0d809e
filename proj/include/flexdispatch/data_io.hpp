#pragma once

#include <filesystem>

#include "flexdispatch/core_types.hpp"

namespace flexdispatch {

enum class GapPolicy {
    Error,  // missing rows are a DataError listing the missing ranges
    Hold,   // missing rows repeat the last observed value
};

GapPolicy parse_gap_policy(std::string_view text);

// Power: header `timestamp,net_kw`, one row per minute, ISO-8601 UTC.
TimeSeries load_power_csv(const std::filesystem::path& path, GapPolicy gaps = GapPolicy::Error);
void save_power_csv(const std::filesystem::path& path, const TimeSeries& series);

// Prices: header `timestamp,eur_per_mwh`, hourly or quarter-hourly rows.
// Returned at 15-min resolution in currency/kWh.
TimeSeries load_price_csv(const std::filesystem::path& path, GapPolicy gaps = GapPolicy::Error);
void save_price_csv(const std::filesystem::path& path, const TimeSeries& per_kwh);

// Forecasts: header `timestamp,net_kw_forecast` at market resolution.
TimeSeries load_forecast_csv(const std::filesystem::path& path);
void save_forecast_csv(const std::filesystem::path& path, const TimeSeries& series);

/// Arithmetic mean over consecutive blocks. `target` must be an integer
/// multiple of the source resolution and the series length a multiple of the
/// block size.
TimeSeries resample_mean(const TimeSeries& series, Duration target);

/// Repeats each value so the series lands on the finer `target` grid.
TimeSeries forward_fill(const TimeSeries& series, Duration target);

}  // namespace flexdispatch
