#pragma once

#include <cstdint>

#include "flexdispatch/core_types.hpp"

namespace flexdispatch {

/// Shape of a synthetic grocery-store net-load day (load minus PV).
///
/// Night base until a ramp that peaks just before opening, a plateau through
/// opening hours with an afternoon shopping bump, and a decline after closing.
/// PV production follows a clear-sky bell scaled by a per-day cloud factor.
/// Minute noise is AR(1), truncated at six standard deviations.
struct StoreProfileConfig {
    double night_base_kw = 40.0;
    double day_plateau_kw = 85.0;
    double preopen_peak_kw = 100.0;
    int open_hour = 7;
    int close_hour = 21;
    double pv_peak_kw = 20.0;
    double noise_sigma_kw = 2.0;
    double noise_autocorr = 0.98;
    std::uint64_t rng_seed = 7;

    // Afternoon rush on top of the plateau (kept below the pre-open peak).
    double afternoon_bump_kw = 15.0;
    // Weekend scaling of everything above the night base.
    double weekend_scale = 0.85;
    // Monday 2018-05-07 00:00 UTC.
    Timestamp start = Timestamp{std::chrono::seconds{1525651200}};

    void validate() const;
};

/// Minute-resolution net load, deterministic for a fixed config.
TimeSeries generate_synthetic(const StoreProfileConfig& config, int days);

/// The noise-free, PV-free template for one day at minute resolution.
std::vector<double> store_template(const StoreProfileConfig& config, bool weekend);

struct PriceProfileConfig {
    double base = 0.05;       // currency/kWh
    double amplitude = 0.01;  // diurnal swing
    double spike_prob = 0.0;  // per 15-min step
    std::uint64_t rng_seed = 8;
    Timestamp start = Timestamp{std::chrono::seconds{1525651200}};

    void validate() const;
};

/// 15-min spot prices: a diurnal sinusoid around `base` plus rare spikes.
TimeSeries generate_price(int days, double base, double amplitude, double spike_prob, std::uint64_t rng_seed,
                          Timestamp start = PriceProfileConfig{}.start);
TimeSeries generate_price(const PriceProfileConfig& config, int days);

/// Stream-separated seed derivation (splitmix64), used for per-day and
/// per-generator seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace flexdispatch
