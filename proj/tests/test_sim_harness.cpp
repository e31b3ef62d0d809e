#include <doctest.h>

#include <filesystem>

#include "flexdispatch/sim_harness.hpp"

using namespace flexdispatch;

namespace {

ScenarioConfig short_config(int days = 5) {
    ScenarioConfig c;
    c.days = days;
    return c;
}

}  // namespace

TEST_CASE("no controller means no change") {
    auto c = short_config();
    c.controller = ControllerKind::None;
    const auto r = run_scenario(c);
    REQUIRE(r.days.size() == 5);
    for (const auto& d : r.days) {
        CHECK(d.peak_reduction_pct == 0.0);
        CHECK(d.cost_reduction_pct == 0.0);
        CHECK(d.controlled_peak_kw == d.baseline_peak_kw);
    }
    CHECK(r.mean_peak_reduction_pct == 0.0);
}

TEST_CASE("perfect-forecast MPC lowers every noise-free peak") {
    auto c = short_config(7);
    c.data.synthetic.noise_sigma_kw = 0.0;
    c.controller = ControllerKind::Mpc;
    c.forecaster = ForecasterKind::Perfect;
    const auto r = run_scenario(c);
    for (const auto& d : r.days) CHECK(d.controlled_peak_kw < d.baseline_peak_kw);
    CHECK(r.forecaster == "perfect");
}

TEST_CASE("report metrics are consistent") {
    auto c = short_config(6);
    c.battery.efficiency = 0.9;
    const auto data = load_scenario_data(c);
    RunTrace trace;
    const auto r = run_scenario(c, data, &trace);
    REQUIRE(trace.log.size() == 6 * 1440);
    REQUIRE(trace.baseline_kw.size() == 6 * 1440);

    double prev = c.initial_stored_kwh();
    for (std::size_t i = 0; i < trace.log.size(); ++i) {
        const auto& m = trace.log[i];
        REQUIRE(m.stored_kwh >= 0.0);
        REQUIRE(m.stored_kwh <= c.battery.capacity_kwh);
        // state carries across midnight: each minute moves from the previous one
        const double expected = m.action == Action::Charge      ? prev + 0.9 * 20.0 / 60.0
                                : m.action == Action::Discharge ? prev - 20.0 / 60.0
                                                                : prev;
        REQUIRE(m.stored_kwh == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
        REQUIRE(m.realized_kw - trace.baseline_kw[i] == doctest::Approx(sign(m.action) * 20.0));
        prev = m.stored_kwh;
    }
    double mean = 0.0;
    for (const auto& d : r.days) {
        CHECK(d.peak_reduction_pct ==
              doctest::Approx(100.0 * (d.baseline_peak_kw - d.controlled_peak_kw) / d.baseline_peak_kw));
        CHECK(d.controlled_energy_kwh - d.baseline_energy_kwh ==
              doctest::Approx(d.charged_kwh - d.discharged_kwh).epsilon(1e-9));
        CHECK(d.min_stored_kwh >= 0.0);
        CHECK(d.max_stored_kwh <= 20.0);
        mean += d.peak_reduction_pct / static_cast<double>(r.days.size());
    }
    CHECK(r.mean_peak_reduction_pct == doctest::Approx(mean));
    CHECK(r.scenario_hash == c.hash());
}

TEST_CASE("runs are deterministic") {
    const auto c = short_config(4);
    CHECK(to_json(run_scenario(c)).dump() == to_json(run_scenario(c)).dump());
}

TEST_CASE("doubling capacity does not reduce the mean peak reduction") {
    auto c = short_config(10);
    const auto small = run_scenario(c);
    c.battery.capacity_kwh = 40.0;
    const auto large = run_scenario(c);
    CHECK(large.mean_peak_reduction_pct >= small.mean_peak_reduction_pct);
}

TEST_CASE("sweep covers the grid and isolates failures") {
    auto c = short_config(3);
    const auto cells = run_sweep(c, SweepGrid{{10.0, 20.0}, {20.0, 40.0}, {}}, 2);
    REQUIRE(cells.size() == 4);
    CHECK(cells[0].battery.power_kw == 10.0);
    CHECK(cells[1].battery.capacity_kwh == 40.0);
    for (const auto& cell : cells) CHECK(cell.report.has_value());

    const auto bad = run_sweep(c, SweepGrid{{}, {}, {1.0, 1.5}}, 1);
    REQUIRE(bad.size() == 2);
    CHECK(bad[0].report.has_value());
    CHECK_FALSE(bad[1].report.has_value());
    CHECK(bad[1].error.find("efficiency") != std::string::npos);

    const auto j = to_json(std::span<const SweepCell>(bad));
    CHECK(j.size() == 2);
}

TEST_CASE("comparison rows share the corpus") {
    const auto rows = compare_controllers(short_config(3));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].controller == ControllerKind::Optimal);
    CHECK(rows[0].report.forecaster == "perfect");
    CHECK(rows[3].report.mean_peak_reduction_pct == 0.0);
    for (const auto& row : rows) CHECK(row.report.days[0].baseline_peak_kw == rows[0].report.days[0].baseline_peak_kw);
}

TEST_CASE("scenario config round-trips through json") {
    ScenarioConfig c;
    c.battery.capacity_kwh = 40.0;
    c.controller = ControllerKind::Rule;
    c.objective = Objective::SpotMin;
    c.initial_kwh = 3.0;
    c.data.synthetic.noise_sigma_kw = 1.5;
    c.control.replan = ReplanCadence::EveryMinute;
    const auto j = to_json(c);
    const auto back = scenario_from_json(nlohmann::json::parse(j.dump()));
    CHECK(to_json(back).dump() == j.dump());
    CHECK(back.hash() == c.hash());
    CHECK(back.hash() != ScenarioConfig{}.hash());

    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"batery", {{"power_kw", 1}}}}), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"battery", {{"power", 1}}}}), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"battery", {{"power_kw", "big"}}}}), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"controller", {{"type", "pid"}}}}), ConfigError);
}

TEST_CASE("scenario validation") {
    ScenarioConfig c;
    c.warmup_days = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);  // seasonal naive needs a week
    c.forecaster = ForecasterKind::Persistence;
    CHECK_NOTHROW(c.validate());
    c.initial_kwh = 25.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.initial_kwh.reset();
    c.controller = ControllerKind::Mpc;
    c.forecaster = ForecasterKind::External;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(ScenarioConfig{}.initial_stored_kwh() == 10.0);
    CHECK(price_seed(7) != load_seed(7));
}

TEST_CASE("csv corpus matches the synthetic one") {
    const auto dir = std::filesystem::temp_directory_path() / "flexdispatch_tests";
    std::filesystem::create_directories(dir);
    auto c = short_config(3);
    const auto data = load_scenario_data(c);
    save_power_csv(dir / "corpus.csv", data.load);

    auto from_csv = c;
    from_csv.days = 0;  // every day the file provides
    from_csv.data.load_csv = (dir / "corpus.csv").string();
    const auto r = run_scenario(from_csv);
    const auto s = run_scenario(c, ScenarioData{data.load, data.market, std::nullopt});
    REQUIRE(r.days.size() == 3);
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(r.days[d].baseline_peak_kw == s.days[d].baseline_peak_kw);
        CHECK(r.days[d].controlled_peak_kw == s.days[d].controlled_peak_kw);
    }
    CHECK_FALSE(r.mean_cost_reduction_pct.has_value());

    from_csv.objective = Objective::SpotMin;
    CHECK_THROWS_AS(run_scenario(from_csv), ConfigError);
}
