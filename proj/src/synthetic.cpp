#include "flexdispatch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

namespace flexdispatch {

namespace {

constexpr int kMinutesPerDay = 24 * 60;
constexpr double kSunriseHour = 4.0;
constexpr double kSunsetHour = 22.0;
constexpr double kMinCloudFactor = 0.3;

// Portable draws on top of mt19937_64; the std distributions are
// implementation-defined and would break cross-platform determinism.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

bool is_weekend(Timestamp day) {
    const std::chrono::weekday wd{std::chrono::floor<std::chrono::days>(day)};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

double lerp(double a, double b, double frac) { return a + (b - a) * frac; }

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void StoreProfileConfig::validate() const {
    if (!(night_base_kw > 0.0)) throw ConfigError("night_base_kw must be positive");
    if (!(day_plateau_kw >= night_base_kw)) throw ConfigError("day_plateau_kw must be >= night_base_kw");
    if (!(preopen_peak_kw >= day_plateau_kw)) throw ConfigError("preopen_peak_kw must be >= day_plateau_kw");
    if (!(afternoon_bump_kw >= 0.0 && day_plateau_kw + afternoon_bump_kw <= preopen_peak_kw)) {
        throw ConfigError("afternoon_bump_kw must keep the plateau at or below preopen_peak_kw");
    }
    if (open_hour < 2 || open_hour >= close_hour || close_hour > 22) {
        throw ConfigError("require 2 <= open_hour < close_hour <= 22");
    }
    if (!(pv_peak_kw >= 0.0)) throw ConfigError("pv_peak_kw must be non-negative");
    if (!(noise_sigma_kw >= 0.0)) throw ConfigError("noise_sigma_kw must be non-negative");
    if (!(noise_autocorr >= 0.0 && noise_autocorr < 1.0)) throw ConfigError("noise_autocorr must be in [0, 1)");
    if (!(weekend_scale > 0.0 && weekend_scale <= 1.0)) throw ConfigError("weekend_scale must be in (0, 1]");
}

std::vector<double> store_template(const StoreProfileConfig& c, bool weekend) {
    const int open = c.open_hour * 60;
    const int close = c.close_hour * 60;
    const int ramp_start = open - 90;
    const int peak_start = open - 30;
    const int settle = open + 15;
    const int night_again = close + 90;
    const double bump_center = 16.5 * 60.0;
    const double bump_half_width = 120.0;

    std::vector<double> out(kMinutesPerDay);
    for (int m = 0; m < kMinutesPerDay; ++m) {
        double v = c.night_base_kw;
        if (m >= ramp_start && m < peak_start) {
            v = lerp(c.night_base_kw, c.preopen_peak_kw, static_cast<double>(m - ramp_start) / (peak_start - ramp_start));
        } else if (m >= peak_start && m < open) {
            v = c.preopen_peak_kw;
        } else if (m >= open && m < settle) {
            v = lerp(c.preopen_peak_kw, c.day_plateau_kw, static_cast<double>(m - open) / (settle - open));
        } else if (m >= settle && m < close) {
            v = c.day_plateau_kw;
            const double x = (m - bump_center) / bump_half_width;
            if (std::abs(x) < 1.0) v += c.afternoon_bump_kw * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
        } else if (m >= close && m < night_again) {
            v = lerp(c.day_plateau_kw, c.night_base_kw, static_cast<double>(m - close) / (night_again - close));
        }
        if (weekend) v = c.night_base_kw + c.weekend_scale * (v - c.night_base_kw);
        out[static_cast<std::size_t>(m)] = v;
    }
    return out;
}

TimeSeries generate_synthetic(const StoreProfileConfig& config, int days) {
    config.validate();
    if (days < 1) throw ConfigError("days must be >= 1");

    const auto weekday_shape = store_template(config, false);
    const auto weekend_shape = store_template(config, true);
    const double sigma = config.noise_sigma_kw;
    const double rho = config.noise_autocorr;
    const double innovation = sigma * std::sqrt(1.0 - rho * rho);
    const double lo = -config.pv_peak_kw;
    const double hi = config.preopen_peak_kw + 6.0 * sigma;

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(days) * kMinutesPerDay);
    for (int d = 0; d < days; ++d) {
        const Timestamp day = config.start + std::chrono::days{d};
        const auto& shape = is_weekend(day) ? weekend_shape : weekday_shape;
        Rng rng(derive_seed(config.rng_seed, static_cast<std::uint64_t>(d)));
        const double cloud = lerp(kMinCloudFactor, 1.0, rng.uniform());
        double noise = sigma * rng.normal();
        for (int m = 0; m < kMinutesPerDay; ++m) {
            if (m > 0) noise = rho * noise + innovation * rng.normal();
            noise = std::clamp(noise, -6.0 * sigma, 6.0 * sigma);
            const double hour = m / 60.0;
            double pv = 0.0;
            if (hour > kSunriseHour && hour < kSunsetHour) {
                const double s = std::sin(std::numbers::pi * (hour - kSunriseHour) / (kSunsetHour - kSunriseHour));
                pv = config.pv_peak_kw * cloud * s * s;
            }
            values.push_back(std::clamp(shape[static_cast<std::size_t>(m)] - pv + noise, lo, hi));
        }
    }
    const TimeGrid grid = TimeGrid::make(config.start, kMinute, values.size());
    return TimeSeries(grid, std::move(values));
}

void PriceProfileConfig::validate() const {
    if (!(base > 0.0)) throw ConfigError("price base must be positive");
    if (!(amplitude >= 0.0)) throw ConfigError("price amplitude must be non-negative");
    if (!(spike_prob >= 0.0 && spike_prob <= 1.0)) throw ConfigError("spike_prob must be in [0, 1]");
}

TimeSeries generate_price(int days, double base, double amplitude, double spike_prob, std::uint64_t rng_seed,
                          Timestamp start) {
    return generate_price(PriceProfileConfig{base, amplitude, spike_prob, rng_seed, start}, days);
}

TimeSeries generate_price(const PriceProfileConfig& config, int days) {
    config.validate();
    if (days < 1) throw ConfigError("days must be >= 1");
    constexpr int steps_per_day = 96;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(days) * steps_per_day);
    for (int d = 0; d < days; ++d) {
        Rng rng(derive_seed(config.rng_seed, static_cast<std::uint64_t>(d)));
        for (int k = 0; k < steps_per_day; ++k) {
            // cheapest around 04:00, dearest around 16:00
            const double hour = k / 4.0;
            double p = config.base - config.amplitude * std::cos(2.0 * std::numbers::pi * (hour - 4.0) / 24.0);
            const double u = rng.uniform();
            const double magnitude = rng.uniform();
            if (u < config.spike_prob) p += config.base * (1.0 + 3.0 * magnitude);
            values.push_back(p);
        }
    }
    const TimeGrid grid = TimeGrid::make(config.start, kMarketStep, values.size());
    return TimeSeries(grid, std::move(values));
}

}  // namespace flexdispatch
