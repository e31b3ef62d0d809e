#include "flexdispatch/forecasting.hpp"

#include <cmath>

#include <fmt/format.h>

#include "flexdispatch/data_io.hpp"

namespace flexdispatch {

namespace {

void check_market_history(const TimeSeries& history, const TimeGrid& horizon, std::size_t days_needed,
                          std::string_view who) {
    if (history.resolution() != horizon.resolution) {
        throw ConfigError(fmt::format("{}: history resolution differs from horizon resolution", who));
    }
    const std::size_t per_day = horizon.steps_per_day();
    if (history.empty() || history.size() < days_needed * per_day) {
        throw DataError(fmt::format("{}: needs {} full day(s) of history, got {} steps", who, days_needed,
                                    history.size()));
    }
    if (history.end() != horizon.start) {
        throw DataError(fmt::format("{}: history ends at {} but horizon starts at {}", who,
                                    format_timestamp(history.end()), format_timestamp(horizon.start)));
    }
}

// Value `lag` steps before each horizon step; lags repeat when the horizon is
// longer than the lag.
TimeSeries lagged(const TimeSeries& history, const TimeGrid& horizon, std::size_t lag) {
    std::vector<double> out(horizon.steps);
    const std::size_t base = history.size() - lag;
    for (std::size_t i = 0; i < horizon.steps; ++i) out[i] = history[base + i % lag];
    return TimeSeries(horizon, std::move(out));
}

}  // namespace

PerfectOracle::PerfectOracle(TimeSeries actuals) : actuals_(std::move(actuals)) {}

TimeSeries PerfectOracle::forecast(const TimeSeries&, const TimeGrid& horizon) const {
    if (horizon.resolution != actuals_.resolution()) {
        throw ConfigError("perfect oracle: horizon resolution differs from actuals");
    }
    return actuals_.window(horizon.start, horizon.end());
}

TimeSeries forecast_persistence(const TimeSeries& history, const TimeGrid& horizon) {
    check_market_history(history, horizon, 1, "persistence");
    return lagged(history, horizon, horizon.steps_per_day());
}

TimeSeries forecast_seasonal_naive(const TimeSeries& history, const TimeGrid& horizon) {
    check_market_history(history, horizon, 7, "seasonal-naive");
    return lagged(history, horizon, 7 * horizon.steps_per_day());
}

TimeSeries Persistence::forecast(const TimeSeries& history, const TimeGrid& horizon) const {
    return forecast_persistence(history, horizon);
}

TimeSeries SeasonalNaive::forecast(const TimeSeries& history, const TimeGrid& horizon) const {
    return forecast_seasonal_naive(history, horizon);
}

ExternalFile::ExternalFile(const std::filesystem::path& path) : forecasts_(load_forecast_csv(path)) {}

ExternalFile::ExternalFile(TimeSeries forecasts) : forecasts_(std::move(forecasts)) {}

TimeSeries ExternalFile::forecast(const TimeSeries&, const TimeGrid& horizon) const {
    if (horizon.resolution != forecasts_.resolution()) {
        throw ConfigError("external forecast: horizon resolution differs from file resolution");
    }
    return forecasts_.window(horizon.start, horizon.end());
}

ForecastErrorReport forecast_error_report(const Forecaster& forecaster, const TimeSeries& actuals,
                                          std::size_t warmup_days) {
    ForecastErrorReport report;
    report.forecaster = forecaster.name();
    const std::size_t per_day = actuals.grid().steps_per_day();
    const std::size_t total_days = actuals.size() / per_day;
    if (warmup_days == 0 || warmup_days >= total_days) {
        throw DataError(fmt::format("need 1..{} warm-up days, got {}", total_days - 1, warmup_days));
    }
    for (std::size_t d = warmup_days; d < total_days; ++d) {
        const TimeSeries history = actuals.slice(0, d * per_day);
        const TimeSeries truth = actuals.slice(d * per_day, per_day);
        const TimeSeries predicted = forecaster.forecast(history, truth.grid());
        double abs_sum = 0.0;
        double pct_sum = 0.0;
        std::size_t pct_count = 0;
        for (std::size_t i = 0; i < per_day; ++i) {
            const double err = std::abs(predicted[i] - truth[i]);
            abs_sum += err;
            if (truth[i] != 0.0) {
                pct_sum += err / std::abs(truth[i]);
                ++pct_count;
            }
        }
        ForecastErrorRow row{truth.start(), abs_sum / static_cast<double>(per_day),
                             pct_count ? 100.0 * pct_sum / static_cast<double>(pct_count) : 0.0};
        report.mean_mae_kw += row.mae_kw;
        report.mean_mape_pct += row.mape_pct;
        report.days.push_back(row);
    }
    report.mean_mae_kw /= static_cast<double>(report.days.size());
    report.mean_mape_pct /= static_cast<double>(report.days.size());
    return report;
}

}  // namespace flexdispatch
