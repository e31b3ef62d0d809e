#include "flexdispatch/data_io.hpp"

#include <charconv>
#include <fstream>
#include <string>

#include <fmt/format.h>

namespace flexdispatch {

namespace {

struct Row {
    Timestamp ts;
    double value;
    std::size_t line;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_value(std::string_view text, const std::filesystem::path& path, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw DataError(fmt::format("{}:{}: cannot parse number '{}'", path.string(), line, text));
    }
    return v;
}

std::vector<Row> read_two_column_csv(const std::filesystem::path& path, std::string_view value_column) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) break;
    }
    const std::string expected = fmt::format("timestamp,{}", value_column);
    if (trim(line) != expected) {
        throw DataError(fmt::format("{}:{}: expected header '{}', got '{}'", path.string(), lineno, expected, trim(line)));
    }

    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
            throw DataError(fmt::format("{}:{}: expected 2 columns", path.string(), lineno));
        }
        Timestamp ts;
        try {
            ts = parse_timestamp(trim(text.substr(0, comma)));
        } catch (const DataError& e) {
            throw DataError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        }
        rows.push_back({ts, parse_value(trim(text.substr(comma + 1)), path, lineno), lineno});
    }
    if (rows.empty()) throw DataError(fmt::format("{}: no data rows", path.string()));
    return rows;
}

// Validates ordering and spacing, then lays rows onto a uniform grid.
TimeSeries to_series(const std::vector<Row>& rows, Duration resolution, GapPolicy gaps,
                     const std::filesystem::path& path) {
    const Timestamp start = rows.front().ts;
    std::vector<std::string> missing;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& prev = rows[i - 1];
        const auto& cur = rows[i];
        if (cur.ts == prev.ts) {
            throw DataError(fmt::format("{}:{}: duplicate timestamp {}", path.string(), cur.line, format_timestamp(cur.ts)));
        }
        if (cur.ts < prev.ts) {
            throw DataError(fmt::format("{}:{}: timestamps out of order ({} after {})", path.string(), cur.line,
                                        format_timestamp(cur.ts), format_timestamp(prev.ts)));
        }
        if ((cur.ts - start) % resolution != Duration::zero()) {
            throw DataError(fmt::format("{}:{}: timestamp {} is off the {}-minute grid", path.string(), cur.line,
                                        format_timestamp(cur.ts), resolution.count() / 60));
        }
        if (cur.ts - prev.ts != resolution) {
            missing.push_back(fmt::format("[{}, {})", format_timestamp(prev.ts + resolution), format_timestamp(cur.ts)));
        }
    }
    if (!missing.empty() && gaps == GapPolicy::Error) {
        throw DataError(fmt::format("{}: {} gap(s), missing {}", path.string(), missing.size(), fmt::join(missing, ", ")));
    }

    const auto steps = static_cast<std::size_t>((rows.back().ts - start) / resolution) + 1;
    std::vector<double> values;
    values.reserve(steps);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) {
            for (Timestamp t = rows[i - 1].ts + resolution; t < rows[i].ts; t += resolution) {
                values.push_back(rows[i - 1].value);
            }
        }
        values.push_back(rows[i].value);
    }
    return TimeSeries(TimeGrid::make(start, resolution, steps), std::move(values));
}

void write_csv(const std::filesystem::path& path, std::string_view column, const TimeSeries& series, double scale) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "timestamp,{}\n", column);
    for (std::size_t i = 0; i < series.size(); ++i) {
        fmt::format_to(std::back_inserter(buf), "{},{}\n", format_timestamp(series.grid().at(i)), series[i] * scale);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace

GapPolicy parse_gap_policy(std::string_view text) {
    if (text == "error" || text == "none") return GapPolicy::Error;
    if (text == "hold") return GapPolicy::Hold;
    throw ConfigError(fmt::format("unknown fill policy '{}' (expected error|hold)", text));
}

TimeSeries load_power_csv(const std::filesystem::path& path, GapPolicy gaps) {
    return to_series(read_two_column_csv(path, "net_kw"), kMinute, gaps, path);
}

void save_power_csv(const std::filesystem::path& path, const TimeSeries& series) {
    write_csv(path, "net_kw", series, 1.0);
}

TimeSeries load_price_csv(const std::filesystem::path& path, GapPolicy gaps) {
    auto rows = read_two_column_csv(path, "eur_per_mwh");
    Duration resolution = std::chrono::hours{1};
    if (rows.size() > 1 && rows[1].ts > rows[0].ts && rows[1].ts - rows[0].ts == kMarketStep) {
        resolution = kMarketStep;
    }
    for (auto& r : rows) r.value /= 1000.0;
    const TimeSeries native = to_series(rows, resolution, gaps, path);
    return resolution == kMarketStep ? native : forward_fill(native, kMarketStep);
}

void save_price_csv(const std::filesystem::path& path, const TimeSeries& per_kwh) {
    write_csv(path, "eur_per_mwh", per_kwh, 1000.0);
}

TimeSeries load_forecast_csv(const std::filesystem::path& path) {
    return to_series(read_two_column_csv(path, "net_kw_forecast"), kMarketStep, GapPolicy::Error, path);
}

void save_forecast_csv(const std::filesystem::path& path, const TimeSeries& series) {
    write_csv(path, "net_kw_forecast", series, 1.0);
}

TimeSeries resample_mean(const TimeSeries& series, Duration target) {
    const Duration source = series.resolution();
    if (target <= Duration::zero() || target % source != Duration::zero()) {
        throw ConfigError(fmt::format("target resolution {} s is not a multiple of source resolution {} s",
                                      target.count(), source.count()));
    }
    const auto block = static_cast<std::size_t>(target / source);
    if (series.size() % block != 0) {
        throw ConfigError(fmt::format("series of {} values does not split into blocks of {}", series.size(), block));
    }
    std::vector<double> out;
    out.reserve(series.size() / block);
    const auto v = series.values();
    for (std::size_t i = 0; i < v.size(); i += block) {
        double sum = 0.0;
        for (std::size_t j = 0; j < block; ++j) sum += v[i + j];
        out.push_back(sum / static_cast<double>(block));
    }
    const TimeGrid grid = TimeGrid::make(series.start(), target, out.size());
    return TimeSeries(grid, std::move(out));
}

TimeSeries forward_fill(const TimeSeries& series, Duration target) {
    const Duration source = series.resolution();
    if (target <= Duration::zero() || source % target != Duration::zero()) {
        throw ConfigError(fmt::format("source resolution {} s is not a multiple of target resolution {} s",
                                      source.count(), target.count()));
    }
    const auto repeat = static_cast<std::size_t>(source / target);
    std::vector<double> out;
    out.reserve(series.size() * repeat);
    for (double v : series.values()) out.insert(out.end(), repeat, v);
    const TimeGrid grid = TimeGrid::make(series.start(), target, out.size());
    return TimeSeries(grid, std::move(out));
}

}  // namespace flexdispatch
