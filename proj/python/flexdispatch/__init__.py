"""Battery dispatch optimization, closed-loop tracking and replay simulation."""

import json as _json

from ._core import (
    Action,
    BatterySpec,
    ConfigError,
    DataError,
    InfeasibleError,
    build_plan,
    decide_action,
    evaluate_peak,
    evaluate_spot,
    generate_price,
    generate_synthetic,
    solve_brute_force,
    solve_dp,
    step_battery,
    tracking_error,
)
from . import _core


def run_scenario(config=None):
    """Run one scenario. `config` is a dict in the JSON config layout."""
    return _json.loads(_core.run_scenario(_json.dumps(config or {})))


def compare_controllers(config=None):
    """Optimal / MPC / rule / none rows on one corpus."""
    return _json.loads(_core.compare_controllers(_json.dumps(config or {})))


def run_sweep(config=None, power_kw=(), capacity_kwh=(), efficiency=(), jobs=1):
    return _json.loads(
        _core.run_sweep(_json.dumps(config or {}), list(power_kw), list(capacity_kwh), list(efficiency), jobs)
    )


__all__ = [
    "Action",
    "BatterySpec",
    "ConfigError",
    "DataError",
    "InfeasibleError",
    "build_plan",
    "compare_controllers",
    "decide_action",
    "evaluate_peak",
    "evaluate_spot",
    "generate_price",
    "generate_synthetic",
    "run_scenario",
    "run_sweep",
    "solve_brute_force",
    "solve_dp",
    "step_battery",
    "tracking_error",
]
