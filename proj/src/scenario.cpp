#include "flexdispatch/scenario.hpp"

#include <initializer_list>

#include <fmt/format.h>

namespace flexdispatch {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Strict reader for one JSON object: rejects unknown keys, converts type
// errors into ConfigError carrying the key path.
class Section {
public:
    Section(const json& j, std::string path, std::initializer_list<std::string_view> keys) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(fmt::format("'{}' must be an object", path_.empty() ? "<root>" : path_));
        for (const auto& item : j_.items()) {
            bool known = false;
            for (auto k : keys) known = known || item.key() == k;
            if (!known) throw ConfigError(fmt::format("unknown config key '{}'", qualified(item.key())));
        }
    }

    bool has(std::string_view key) const { return j_.contains(std::string(key)); }

    template <typename T>
    void read(std::string_view key, T& out) const {
        const std::string k(key);
        if (!j_.contains(k)) return;
        try {
            out = j_.at(k).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(fmt::format("config key '{}' has the wrong type", qualified(k)));
        }
    }

    template <typename Parse>
    void read_enum(std::string_view key, Parse parse) const {
        std::string text;
        read(key, text);
        if (has(key)) parse(text);
    }

    Section child(std::string_view key, std::initializer_list<std::string_view> keys) const {
        return Section(j_.at(std::string(key)), qualified(std::string(key)), keys);
    }

private:
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
};

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::string_view to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::None: return "none";
        case ControllerKind::Rule: return "rule";
        case ControllerKind::Mpc: return "mpc";
        case ControllerKind::Optimal: return "optimal";
    }
    return "none";
}

ControllerKind parse_controller(std::string_view text) {
    if (text == "none") return ControllerKind::None;
    if (text == "rule") return ControllerKind::Rule;
    if (text == "mpc") return ControllerKind::Mpc;
    if (text == "optimal") return ControllerKind::Optimal;
    throw ConfigError(fmt::format("unknown controller '{}' (expected none|rule|mpc|optimal)", text));
}

std::string_view to_string(ForecasterKind k) {
    switch (k) {
        case ForecasterKind::Perfect: return "perfect";
        case ForecasterKind::Persistence: return "persistence";
        case ForecasterKind::SeasonalNaive: return "seasonal-naive";
        case ForecasterKind::External: return "external";
    }
    return "perfect";
}

ForecasterKind parse_forecaster(std::string_view text) {
    if (text == "perfect") return ForecasterKind::Perfect;
    if (text == "persistence") return ForecasterKind::Persistence;
    if (text == "seasonal-naive") return ForecasterKind::SeasonalNaive;
    if (text == "external") return ForecasterKind::External;
    throw ConfigError(fmt::format("unknown forecaster '{}' (expected perfect|persistence|seasonal-naive|external)", text));
}

std::uint64_t load_seed(std::uint64_t seed) { return seed; }

std::uint64_t price_seed(std::uint64_t seed) { return derive_seed(seed, 0x5EED'0F'F1CEULL); }

void ScenarioConfig::validate() const {
    battery.validate();
    control.validate();
    rule.validate();
    data.synthetic.validate();
    data.price.validate();
    if (warmup_days < 0) throw ConfigError("warmup_days must be >= 0");
    if (data.load_csv.empty() && days < 1) throw ConfigError("days must be >= 1");
    if (initial_kwh && !(*initial_kwh >= 0.0 && *initial_kwh <= battery.capacity_kwh)) {
        throw ConfigError("initial_kwh must be in [0, capacity_kwh]");
    }
    if (forecaster == ForecasterKind::External && forecast_csv.empty() &&
        (controller == ControllerKind::Mpc)) {
        throw ConfigError("external forecaster needs forecaster.path");
    }
    std::size_t needed = 0;
    if (controller == ControllerKind::Mpc) {
        if (forecaster == ForecasterKind::SeasonalNaive) needed = 7;
        if (forecaster == ForecasterKind::Persistence) needed = 1;
    }
    if (controller == ControllerKind::Rule && objective == Objective::PeakMin) {
        needed = static_cast<std::size_t>(rule.lookback_days);
    }
    if (static_cast<std::size_t>(warmup_days) < needed) {
        throw ConfigError(fmt::format("{} controller needs at least {} warm-up day(s), got {}", to_string(controller),
                                      needed, warmup_days));
    }
}

double ScenarioConfig::initial_stored_kwh() const {
    return initial_kwh.value_or(0.5 * battery.capacity_kwh);
}

std::string ScenarioConfig::hash() const {
    return fmt::format("{:016x}", fnv1a(to_json(*this).dump()));
}

ordered_json to_json(const ScenarioConfig& c) {
    const auto& s = c.data.synthetic;
    const auto& p = c.data.price;
    ordered_json j;
    j["seed"] = c.seed;
    j["objective"] = to_string(c.objective);
    j["days"] = c.days;
    j["warmup_days"] = c.warmup_days;
    if (c.initial_kwh) j["initial_kwh"] = *c.initial_kwh;
    j["battery"] = {{"power_kw", c.battery.power_kw},
                    {"capacity_kwh", c.battery.capacity_kwh},
                    {"efficiency", c.battery.efficiency},
                    {"reserve_kwh", c.battery.reserve_kwh}};
    j["controller"] = {{"type", to_string(c.controller)},
                       {"phi", c.control.tolerance_phi},
                       {"replan", to_string(c.control.replan)}};
    j["rule"] = {{"discharge_percentile", c.rule.discharge_percentile},
                 {"charge_percentile", c.rule.charge_percentile},
                 {"lookback_days", c.rule.lookback_days}};
    j["forecaster"] = {{"type", to_string(c.forecaster)}, {"path", c.forecast_csv}};
    j["data"] = {{"load_csv", c.data.load_csv},
                 {"price_csv", c.data.price_csv},
                 {"fill", c.data.fill == GapPolicy::Hold ? "hold" : "error"},
                 {"synthetic",
                  {{"night_base_kw", s.night_base_kw},
                   {"day_plateau_kw", s.day_plateau_kw},
                   {"preopen_peak_kw", s.preopen_peak_kw},
                   {"open_hour", s.open_hour},
                   {"close_hour", s.close_hour},
                   {"pv_peak_kw", s.pv_peak_kw},
                   {"noise_sigma_kw", s.noise_sigma_kw},
                   {"noise_autocorr", s.noise_autocorr},
                   {"afternoon_bump_kw", s.afternoon_bump_kw},
                   {"weekend_scale", s.weekend_scale},
                   {"start", format_timestamp(s.start)}}},
                 {"price",
                  {{"base", p.base},
                   {"amplitude", p.amplitude},
                   {"spike_prob", p.spike_prob}}}};
    return j;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j, ScenarioConfig c) {
    const Section root(j, "", {"seed", "objective", "days", "warmup_days", "initial_kwh", "battery", "controller",
                               "rule", "forecaster", "data", "output_dir"});
    root.read("seed", c.seed);
    root.read_enum("objective", [&](std::string_view t) { c.objective = parse_objective(t); });
    root.read("days", c.days);
    root.read("warmup_days", c.warmup_days);
    if (root.has("initial_kwh")) {
        double v = 0.0;
        root.read("initial_kwh", v);
        c.initial_kwh = v;
    }
    if (root.has("battery")) {
        const auto b = root.child("battery", {"power_kw", "capacity_kwh", "efficiency", "reserve_kwh"});
        b.read("power_kw", c.battery.power_kw);
        b.read("capacity_kwh", c.battery.capacity_kwh);
        b.read("efficiency", c.battery.efficiency);
        b.read("reserve_kwh", c.battery.reserve_kwh);
    }
    if (root.has("controller")) {
        const auto ctl = root.child("controller", {"type", "phi", "replan"});
        ctl.read_enum("type", [&](std::string_view t) { c.controller = parse_controller(t); });
        ctl.read("phi", c.control.tolerance_phi);
        ctl.read_enum("replan", [&](std::string_view t) { c.control.replan = parse_replan(t); });
    }
    if (root.has("rule")) {
        const auto r = root.child("rule", {"discharge_percentile", "charge_percentile", "lookback_days"});
        r.read("discharge_percentile", c.rule.discharge_percentile);
        r.read("charge_percentile", c.rule.charge_percentile);
        r.read("lookback_days", c.rule.lookback_days);
    }
    if (root.has("forecaster")) {
        const auto f = root.child("forecaster", {"type", "path"});
        f.read_enum("type", [&](std::string_view t) { c.forecaster = parse_forecaster(t); });
        f.read("path", c.forecast_csv);
    }
    if (root.has("data")) {
        const auto d = root.child("data", {"load_csv", "price_csv", "fill", "synthetic", "price"});
        d.read("load_csv", c.data.load_csv);
        d.read("price_csv", c.data.price_csv);
        d.read_enum("fill", [&](std::string_view t) { c.data.fill = parse_gap_policy(t); });
        if (d.has("synthetic")) {
            auto& s = c.data.synthetic;
            const auto sy = d.child("synthetic", {"night_base_kw", "day_plateau_kw", "preopen_peak_kw", "open_hour",
                                                  "close_hour", "pv_peak_kw", "noise_sigma_kw", "noise_autocorr",
                                                  "afternoon_bump_kw", "weekend_scale", "start"});
            sy.read("night_base_kw", s.night_base_kw);
            sy.read("day_plateau_kw", s.day_plateau_kw);
            sy.read("preopen_peak_kw", s.preopen_peak_kw);
            sy.read("open_hour", s.open_hour);
            sy.read("close_hour", s.close_hour);
            sy.read("pv_peak_kw", s.pv_peak_kw);
            sy.read("noise_sigma_kw", s.noise_sigma_kw);
            sy.read("noise_autocorr", s.noise_autocorr);
            sy.read("afternoon_bump_kw", s.afternoon_bump_kw);
            sy.read("weekend_scale", s.weekend_scale);
            sy.read_enum("start", [&](std::string_view t) { s.start = day_start(parse_timestamp(t)); });
        }
        if (d.has("price")) {
            auto& p = c.data.price;
            const auto pr = d.child("price", {"base", "amplitude", "spike_prob"});
            pr.read("base", p.base);
            pr.read("amplitude", p.amplitude);
            pr.read("spike_prob", p.spike_prob);
        }
    }
    return c;
}

}  // namespace flexdispatch
