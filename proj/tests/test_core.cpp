#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "flexdispatch/data_io.hpp"
#include "oracles.hpp"

using namespace flexdispatch;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "flexdispatch_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

const Timestamp kT0 = parse_timestamp("2018-05-07T00:00:00Z");

}  // namespace

TEST_CASE("step_battery charge, idle and lossy charge") {
    const BatterySpec spec{20.0, 20.0, 1.0, 0.0};
    auto r = step_battery(BatteryState{0.0}, Action::Charge, spec, 0.25);
    CHECK(r.state.stored_kwh == 5.0);
    CHECK(r.grid_delta_kw == 20.0);

    r = step_battery(BatteryState{10.0}, Action::Idle, spec, 0.25);
    CHECK(r.state.stored_kwh == 10.0);
    CHECK(r.grid_delta_kw == 0.0);

    const BatterySpec lossy{20.0, 20.0, 0.9, 0.0};
    r = step_battery(BatteryState{0.0}, Action::Charge, lossy, 0.25);
    CHECK(r.state.stored_kwh == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(r.grid_delta_kw == 20.0);

    r = step_battery(BatteryState{5.0}, Action::Discharge, lossy, 0.25);
    CHECK(r.state.stored_kwh == 0.0);
    CHECK(r.grid_delta_kw == -20.0);
}

TEST_CASE("step_battery rejects infeasible actions") {
    const BatterySpec spec{20.0, 20.0, 1.0, 0.0};
    CHECK_THROWS_AS(step_battery(BatteryState{0.0}, Action::Discharge, spec, 0.25), InfeasibleError);
    CHECK_THROWS_AS(step_battery(BatteryState{18.0}, Action::Charge, spec, 0.25), InfeasibleError);
    CHECK_THROWS_WITH_AS(step_battery(BatteryState{18.0}, Action::Charge, spec, 0.25),
                         doctest::Contains("capacity"), InfeasibleError);
}

TEST_CASE("battery properties over random action sequences") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> act(-1, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const BatterySpec spec{10.0 + trial % 5, 20.0, trial % 2 ? 1.0 : 0.9, 0.0};
        BatteryState s{spec.capacity_kwh / 2};
        for (int k = 0; k < 60; ++k) {
            const auto a = static_cast<Action>(act(rng));
            if (!can_apply(s, a, spec, 1.0 / 60)) continue;
            s = step_battery(s, a, spec, 1.0 / 60).state;
            REQUIRE(s.stored_kwh >= 0.0);
            REQUIRE(s.stored_kwh <= spec.capacity_kwh);
        }
        CHECK(step_battery(s, Action::Idle, spec, 0.25).state == s);
    }
    // charge then discharge returns to the start exactly with eta = 1
    const BatterySpec spec{20.0, 20.0, 1.0, 0.0};
    const auto up = step_battery(BatteryState{7.0}, Action::Charge, spec, 0.25).state;
    CHECK(step_battery(up, Action::Discharge, spec, 0.25).state.stored_kwh == 7.0);
}

TEST_CASE("battery spec validation") {
    CHECK_NOTHROW(BatterySpec{}.validate());
    CHECK_THROWS_AS((BatterySpec{20, 20, 0.0, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((BatterySpec{20, 20, 1.1, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((BatterySpec{20, 20, 1.0, 25}.validate()), ConfigError);
    CHECK_THROWS_AS((BatterySpec{-1, 20, 1.0, 0}.validate()), ConfigError);
}

TEST_CASE("time grid arithmetic") {
    const auto g = TimeGrid::make(kT0, kMarketStep, 96);
    CHECK(g.steps_per_day() == 96);
    CHECK(g.end() == kT0 + std::chrono::hours{24});
    CHECK(g.index_of(kT0 + std::chrono::minutes{30}) == 2u);
    CHECK_FALSE(g.index_of(kT0 + std::chrono::minutes{31}).has_value());
    CHECK_THROWS_AS(TimeGrid::make(kT0, std::chrono::minutes{7}, 10), ConfigError);
    CHECK_THROWS_AS(TimeGrid::make(kT0, kMinute, 0), ConfigError);
    CHECK_THROWS_AS(TimeSeries(TimeGrid::make(kT0, kMinute, 3), {1.0, 2.0}), ConfigError);
}

TEST_CASE("timestamps round-trip") {
    CHECK(format_timestamp(kT0) == "2018-05-07T00:00:00Z");
    CHECK(parse_timestamp("2018-05-07T06:45") == kT0 + std::chrono::minutes{405});
    CHECK(parse_timestamp("2018-05-07T06:45:00") == kT0 + std::chrono::minutes{405});
    CHECK(day_start(kT0 + std::chrono::minutes{1439}) == kT0);
    CHECK_THROWS_AS(parse_timestamp("07/05/2018 06:45"), DataError);
    CHECK_THROWS_AS(parse_timestamp("2018-13-07T00:00Z"), DataError);
}

TEST_CASE("action names") {
    CHECK(parse_action("charge") == Action::Charge);
    CHECK(to_string(Action::Discharge) == "discharge");
    CHECK(sign(Action::Discharge) == -1);
    CHECK_THROWS_AS(parse_action("hold"), DataError);
}

TEST_CASE("resample_mean averages blocks") {
    std::vector<double> v;
    for (int i = 1; i <= 15; ++i) v.push_back(i);
    const auto r = resample_mean(oracle::series(v, kMinute), kMarketStep);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == 8.0);

    std::vector<double> flat(30, 42.0);
    const auto f = resample_mean(oracle::series(flat, kMinute), kMarketStep);
    CHECK(f.size() == 2);
    CHECK(f[0] == 42.0);
    CHECK(f[1] == 42.0);

    CHECK_THROWS_AS(resample_mean(oracle::series(std::vector<double>(20, 1.0), kMinute), kMarketStep), ConfigError);
    CHECK_THROWS_AS(resample_mean(oracle::series(flat, kMarketStep), kMinute), ConfigError);
}

TEST_CASE("resample_mean preserves energy") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-20.0, 150.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(15 * 96);
        for (auto& x : v) x = u(rng);
        const auto coarse = resample_mean(oracle::series(v, kMinute), kMarketStep);
        double fine_kwh = 0.0, coarse_kwh = 0.0;
        for (double x : v) fine_kwh += x / 60.0;
        for (double x : coarse.values()) coarse_kwh += x * 0.25;
        CHECK(coarse_kwh == doctest::Approx(fine_kwh).epsilon(1e-9));
    }
}

TEST_CASE("forward_fill repeats values") {
    const auto hourly = TimeSeries(TimeGrid::make(kT0, std::chrono::hours{1}, 2), {0.05, 0.07});
    const auto q = forward_fill(hourly, kMarketStep);
    REQUIRE(q.size() == 8);
    CHECK(q[3] == 0.05);
    CHECK(q[4] == 0.07);
    CHECK(q.resolution() == kMarketStep);
}

TEST_CASE("price csv: hourly per-MWh to quarter-hourly per-kWh") {
    const auto p = scratch("prices_hourly.csv");
    write_file(p, "timestamp,eur_per_mwh\n2018-05-07T00:00:00Z,50\n2018-05-07T01:00:00Z,70\n");
    const auto s = load_price_csv(p);
    REQUIRE(s.size() == 8);
    CHECK(s[0] == 0.05);
    CHECK(s[3] == 0.05);
    CHECK(s[4] == doctest::Approx(0.07).epsilon(1e-12));
    CHECK(s.resolution() == kMarketStep);

    const auto q = scratch("prices_quarter.csv");
    write_file(q, "timestamp,eur_per_mwh\n2018-05-07T00:00:00Z,50\n2018-05-07T00:15:00Z,60\n");
    const auto sq = load_price_csv(q);
    REQUIRE(sq.size() == 2);
    CHECK(sq[1] == doctest::Approx(0.06).epsilon(1e-12));
}

TEST_CASE("power csv round trip is exact") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-20.0, 150.0);
    std::vector<double> v(600);
    for (auto& x : v) x = u(rng);
    const TimeSeries s(TimeGrid::make(kT0, kMinute, v.size()), v);
    const auto p = scratch("power_rt.csv");
    save_power_csv(p, s);
    const auto back = load_power_csv(p);
    CHECK(back.grid() == s.grid());
    for (std::size_t i = 0; i < v.size(); ++i) REQUIRE(back[i] == v[i]);

    const auto f = scratch("forecast_rt.csv");
    const TimeSeries fc(TimeGrid::make(kT0, kMarketStep, 40), std::vector<double>(v.begin(), v.begin() + 40));
    save_forecast_csv(f, fc);
    const auto fb = load_forecast_csv(f);
    for (std::size_t i = 0; i < 40; ++i) REQUIRE(fb[i] == fc[i]);
}

TEST_CASE("csv errors name the file and line") {
    const auto p = scratch("bad.csv");

    write_file(p, "time,kw\n");
    CHECK_THROWS_WITH_AS(load_power_csv(p), doctest::Contains("expected header"), DataError);

    write_file(p, "timestamp,net_kw\n2018-05-07T00:00:00Z,1\n2018-05-07T00:01:00Z,abc\n");
    CHECK_THROWS_WITH_AS(load_power_csv(p), doctest::Contains("bad.csv:3"), DataError);

    write_file(p, "timestamp,net_kw\n2018-05-07T00:00:00Z,1\n2018-05-07T00:00:00Z,2\n");
    CHECK_THROWS_WITH_AS(load_power_csv(p), doctest::Contains("duplicate"), DataError);

    write_file(p, "timestamp,net_kw\n2018-05-07T00:01:00Z,1\n2018-05-07T00:00:00Z,2\n");
    CHECK_THROWS_WITH_AS(load_power_csv(p), doctest::Contains("out of order"), DataError);

    write_file(p, "timestamp,net_kw\n2018-05-07T00:00:00Z,1\n2018-05-07T00:00:30Z,2\n");
    CHECK_THROWS_WITH_AS(load_power_csv(p), doctest::Contains("off the 1-minute grid"), DataError);

    write_file(p, "timestamp,net_kw\n2018-05-07T00:00:00Z,1\n2018-05-07T00:03:00Z,2\n");
    CHECK_THROWS_WITH_AS(load_power_csv(p), doctest::Contains("[2018-05-07T00:01:00Z, 2018-05-07T00:03:00Z)"),
                         DataError);
    const auto held = load_power_csv(p, GapPolicy::Hold);
    REQUIRE(held.size() == 4);
    CHECK(held[1] == 1.0);
    CHECK(held[2] == 1.0);
    CHECK(held[3] == 2.0);

    CHECK_THROWS_AS(load_power_csv(scratch("does_not_exist.csv")), DataError);
    CHECK_THROWS_AS(parse_gap_policy("interpolate"), ConfigError);
}

TEST_CASE("time series window and slice") {
    std::vector<double> v(96 * 2);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    const TimeSeries s(TimeGrid::make(kT0, kMarketStep, v.size()), v);
    const auto w = s.window(kT0 + std::chrono::hours{24}, kT0 + std::chrono::hours{25});
    REQUIRE(w.size() == 4);
    CHECK(w[0] == 96.0);
    CHECK(w.start() == kT0 + std::chrono::hours{24});
    CHECK(s.slice(10, 2)[1] == 11.0);
    CHECK(s.max() == 191.0);
    CHECK_THROWS_AS(s.window(kT0, kT0 + std::chrono::hours{49}), DataError);
    CHECK_THROWS_AS(s.slice(190, 5), ConfigError);
}
