"""Finite-volume simulation of consumption chemotaxis with attraction and repulsion."""

from .diagnostics import (
    DiagnosticsRecord,
    LyapunovConfig,
    ThresholdReport,
    default_lyapunov_config,
    lk_norm,
    lyapunov,
    mass,
    thresholds,
)
from .fields import InitialData, ScalarField, SimState, field_extrema, init_field
from .geometry import ConfigurationError, DomainSpec, Grid, active_volume, build_grid
from .linsolve import HelmholtzOperator, SolveReport, SolverError, solve_spd
from .operators import cfl_max_dt, grad_on_faces, laplacian_apply, taxis_divergence
from .stepper import InvariantViolation, ModelParams, StepError, run, step

__version__ = "0.1.0"
