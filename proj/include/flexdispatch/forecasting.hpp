#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "flexdispatch/core_types.hpp"

namespace flexdispatch {

/// Day-ahead net-consumption forecaster at market resolution.
///
/// `history` holds realized market-resolution net load ending where the
/// horizon starts. Implementations are stateless after construction.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual std::string name() const = 0;
    virtual TimeSeries forecast(const TimeSeries& history, const TimeGrid& horizon) const = 0;
};

/// Returns the realized values it was built with.
class PerfectOracle final : public Forecaster {
public:
    explicit PerfectOracle(TimeSeries actuals);
    std::string name() const override { return "perfect"; }
    TimeSeries forecast(const TimeSeries& history, const TimeGrid& horizon) const override;

private:
    TimeSeries actuals_;
};

/// Repeats the most recent full day of history.
class Persistence final : public Forecaster {
public:
    std::string name() const override { return "persistence"; }
    TimeSeries forecast(const TimeSeries& history, const TimeGrid& horizon) const override;
};

/// Same time of day, one week earlier.
class SeasonalNaive final : public Forecaster {
public:
    std::string name() const override { return "seasonal-naive"; }
    TimeSeries forecast(const TimeSeries& history, const TimeGrid& horizon) const override;
};

/// Precomputed forecasts (`timestamp,net_kw_forecast`), looked up by time.
class ExternalFile final : public Forecaster {
public:
    explicit ExternalFile(const std::filesystem::path& path);
    explicit ExternalFile(TimeSeries forecasts);
    std::string name() const override { return "external"; }
    TimeSeries forecast(const TimeSeries& history, const TimeGrid& horizon) const override;

private:
    TimeSeries forecasts_;
};

TimeSeries forecast_persistence(const TimeSeries& history, const TimeGrid& horizon);
TimeSeries forecast_seasonal_naive(const TimeSeries& history, const TimeGrid& horizon);

struct ForecastErrorRow {
    Timestamp day;
    double mae_kw = 0.0;
    double mape_pct = 0.0;  // over steps with non-zero actuals
};

struct ForecastErrorReport {
    std::string forecaster;
    std::vector<ForecastErrorRow> days;
    double mean_mae_kw = 0.0;
    double mean_mape_pct = 0.0;
};

/// Scores day-ahead forecasts against `actuals` (market resolution). The first
/// `warmup_days` days are history only.
ForecastErrorReport forecast_error_report(const Forecaster& forecaster, const TimeSeries& actuals,
                                          std::size_t warmup_days);

}  // namespace flexdispatch
