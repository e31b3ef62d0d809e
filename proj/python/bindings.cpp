#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flexdispatch/baseline_rule.hpp"
#include "flexdispatch/controller.hpp"
#include "flexdispatch/optimizer.hpp"
#include "flexdispatch/sim_harness.hpp"
#include "flexdispatch/synthetic.hpp"

namespace py = pybind11;
namespace fd = flexdispatch;

namespace {

fd::TimeSeries market_series(const std::vector<double>& values, double step_minutes) {
    const fd::Duration res{static_cast<long>(step_minutes * 60.0)};
    return fd::TimeSeries(fd::TimeGrid::make(fd::Timestamp{}, res, values.size()), values);
}

std::vector<fd::Action> to_actions(const std::vector<int>& codes) {
    std::vector<fd::Action> out;
    out.reserve(codes.size());
    for (int c : codes) {
        if (c < -1 || c > 1) throw fd::ConfigError("actions must be -1, 0 or 1");
        out.push_back(static_cast<fd::Action>(c));
    }
    return out;
}

std::vector<int> to_codes(const std::vector<fd::Action>& actions) {
    std::vector<int> out;
    out.reserve(actions.size());
    for (auto a : actions) out.push_back(fd::sign(a));
    return out;
}

py::dict solution_dict(const fd::DispatchSolution& sol) {
    py::dict d;
    d["actions"] = to_codes(sol.actions);
    d["objective_value"] = sol.objective_value;
    d["secondary_value"] = sol.secondary_value;
    std::vector<double> traj;
    for (const auto& s : sol.trajectory) traj.push_back(s.stored_kwh);
    d["trajectory"] = traj;
    return d;
}

fd::DispatchProblem make_problem(const std::vector<double>& forecast, const fd::BatterySpec& spec, double initial_kwh,
                                 const std::string& objective, const std::optional<std::vector<double>>& prices,
                                 double step_minutes) {
    std::optional<fd::TimeSeries> p;
    if (prices) p = market_series(*prices, step_minutes);
    return fd::DispatchProblem{market_series(forecast, step_minutes), p, spec, fd::BatteryState{initial_kwh},
                               fd::parse_objective(objective)};
}

fd::ScenarioConfig scenario_from_string(const std::string& config_json) {
    return fd::scenario_from_json(config_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(config_json));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Battery dispatch optimization, closed-loop tracking and replay simulation.";

    py::register_exception<fd::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<fd::DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<fd::InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);

    py::enum_<fd::Action>(m, "Action")
        .value("DISCHARGE", fd::Action::Discharge)
        .value("IDLE", fd::Action::Idle)
        .value("CHARGE", fd::Action::Charge);

    py::class_<fd::BatterySpec>(m, "BatterySpec")
        .def(py::init([](double power_kw, double capacity_kwh, double efficiency, double reserve_kwh) {
                 fd::BatterySpec s{power_kw, capacity_kwh, efficiency, reserve_kwh};
                 s.validate();
                 return s;
             }),
             py::arg("power_kw") = 20.0, py::arg("capacity_kwh") = 20.0, py::arg("efficiency") = 1.0,
             py::arg("reserve_kwh") = 0.0)
        .def_readwrite("power_kw", &fd::BatterySpec::power_kw)
        .def_readwrite("capacity_kwh", &fd::BatterySpec::capacity_kwh)
        .def_readwrite("efficiency", &fd::BatterySpec::efficiency)
        .def_readwrite("reserve_kwh", &fd::BatterySpec::reserve_kwh)
        .def("__repr__", [](const fd::BatterySpec& s) {
            return "BatterySpec(power_kw=" + std::to_string(s.power_kw) + ", capacity_kwh=" +
                   std::to_string(s.capacity_kwh) + ", efficiency=" + std::to_string(s.efficiency) +
                   ", reserve_kwh=" + std::to_string(s.reserve_kwh) + ")";
        });

    m.def(
        "step_battery",
        [](double stored_kwh, fd::Action action, const fd::BatterySpec& spec, double hours) {
            const auto r = fd::step_battery(fd::BatteryState{stored_kwh}, action, spec, hours);
            return py::make_tuple(r.state.stored_kwh, r.grid_delta_kw);
        },
        py::arg("stored_kwh"), py::arg("action"), py::arg("spec"), py::arg("hours"),
        "Apply one action; returns (stored_kwh, grid_delta_kw).");

    m.def(
        "evaluate_peak",
        [](const std::vector<double>& forecast, const std::vector<int>& actions, const fd::BatterySpec& spec) {
            return fd::evaluate_peak(market_series(forecast, 15), to_actions(actions), spec);
        },
        py::arg("forecast"), py::arg("actions"), py::arg("spec"));

    m.def(
        "evaluate_spot",
        [](const std::vector<double>& forecast, const std::vector<double>& prices, const std::vector<int>& actions,
           const fd::BatterySpec& spec, double step_minutes) {
            return fd::evaluate_spot(market_series(forecast, step_minutes), market_series(prices, step_minutes),
                                     to_actions(actions), spec);
        },
        py::arg("forecast"), py::arg("prices"), py::arg("actions"), py::arg("spec"), py::arg("step_minutes") = 15.0);

    m.def(
        "solve_dp",
        [](const std::vector<double>& forecast, const fd::BatterySpec& spec, double initial_kwh,
           const std::string& objective, const std::optional<std::vector<double>>& prices, double step_minutes) {
            return solution_dict(fd::solve_dp(make_problem(forecast, spec, initial_kwh, objective, prices, step_minutes)));
        },
        py::arg("forecast"), py::arg("spec"), py::arg("initial_kwh") = 0.0, py::arg("objective") = "peak",
        py::arg("prices") = py::none(), py::arg("step_minutes") = 15.0,
        "Exact dispatch optimum; returns dict(actions, objective_value, secondary_value, trajectory).");

    m.def(
        "solve_brute_force",
        [](const std::vector<double>& forecast, const fd::BatterySpec& spec, double initial_kwh,
           const std::string& objective, const std::optional<std::vector<double>>& prices, double step_minutes) {
            return solution_dict(
                fd::solve_brute_force(make_problem(forecast, spec, initial_kwh, objective, prices, step_minutes)));
        },
        py::arg("forecast"), py::arg("spec"), py::arg("initial_kwh") = 0.0, py::arg("objective") = "peak",
        py::arg("prices") = py::none(), py::arg("step_minutes") = 15.0);

    m.def(
        "build_plan",
        [](const std::vector<double>& forecast, const std::vector<int>& actions, const fd::BatterySpec& spec) {
            const auto plan = fd::build_plan(market_series(forecast, 15), to_actions(actions), spec);
            return std::vector<double>(plan.target_kw.values().begin(), plan.target_kw.values().end());
        },
        py::arg("forecast"), py::arg("actions"), py::arg("spec"));

    m.def(
        "tracking_error",
        [](const std::vector<double>& realized, double target_kw) { return fd::tracking_error(realized, target_kw); },
        py::arg("realized_minutes"), py::arg("target_kw"));

    m.def(
        "decide_action",
        [](double delta_p_kw, double phi, double stored_kwh, const fd::BatterySpec& spec) {
            fd::ControllerConfig cfg;
            cfg.tolerance_phi = phi;
            cfg.validate();
            return fd::decide_action(delta_p_kw, cfg, fd::BatteryState{stored_kwh}, spec);
        },
        py::arg("delta_p_kw"), py::arg("phi"), py::arg("stored_kwh"), py::arg("spec"));

    m.def(
        "generate_synthetic",
        [](int days, std::uint64_t seed, double noise_sigma_kw, double pv_peak_kw) {
            fd::StoreProfileConfig cfg;
            cfg.rng_seed = seed;
            cfg.noise_sigma_kw = noise_sigma_kw;
            cfg.pv_peak_kw = pv_peak_kw;
            const auto s = fd::generate_synthetic(cfg, days);
            return std::vector<double>(s.values().begin(), s.values().end());
        },
        py::arg("days"), py::arg("seed") = 7, py::arg("noise_sigma_kw") = fd::StoreProfileConfig{}.noise_sigma_kw,
        py::arg("pv_peak_kw") = fd::StoreProfileConfig{}.pv_peak_kw,
        "Minute-resolution synthetic store net load (default profile).");

    m.def(
        "generate_price",
        [](int days, double base, double amplitude, double spike_prob, std::uint64_t seed) {
            const auto s = fd::generate_price(days, base, amplitude, spike_prob, seed);
            return std::vector<double>(s.values().begin(), s.values().end());
        },
        py::arg("days"), py::arg("base") = 0.05, py::arg("amplitude") = 0.01, py::arg("spike_prob") = 0.0,
        py::arg("seed") = 8);

    m.def(
        "run_scenario",
        [](const std::string& config_json) {
            const auto config = scenario_from_string(config_json);
            py::gil_scoped_release release;
            return fd::to_json(fd::run_scenario(config)).dump();
        },
        py::arg("config_json") = "", "Run one scenario; config and result are JSON strings.");

    m.def(
        "compare_controllers",
        [](const std::string& config_json) {
            const auto config = scenario_from_string(config_json);
            py::gil_scoped_release release;
            const auto rows = fd::compare_controllers(config);
            return fd::to_json(std::span<const fd::ComparisonRow>(rows)).dump();
        },
        py::arg("config_json") = "", "Optimal / MPC / rule / none on the same corpus, as a JSON string.");

    m.def(
        "run_sweep",
        [](const std::string& config_json, std::vector<double> power_kw, std::vector<double> capacity_kwh,
           std::vector<double> efficiency, int jobs) {
            const auto config = scenario_from_string(config_json);
            py::gil_scoped_release release;
            const auto cells = fd::run_sweep(config, fd::SweepGrid{power_kw, capacity_kwh, efficiency}, jobs);
            return fd::to_json(std::span<const fd::SweepCell>(cells)).dump();
        },
        py::arg("config_json") = "", py::arg("power_kw") = std::vector<double>{},
        py::arg("capacity_kwh") = std::vector<double>{}, py::arg("efficiency") = std::vector<double>{},
        py::arg("jobs") = 1);
}
