"""Scenario presets, runs, sweeps and the command line."""

from .runner import (
    Comparison,
    Summary,
    SweepResult,
    compare_2d_3d,
    load_summary,
    run_scenario,
    run_sweep,
)
from .scenario import (
    Scenario,
    ScenarioError,
    SweepSpec,
    load_scenario,
    load_sweep,
    scenario_from_dict,
    scenario_to_dict,
    sweep_from_dict,
)
