"""Two-stage splitting step for the consumption chemotaxis models.

Stage 1 advances the chemicals implicitly with the old cell density as
absorption rate; stage 2 moves the cells with donor-cell taxis driven by
the *new* chemical gradients and then diffuses them implicitly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .diagnostics import DiagnosticsRecord, Recorder
from .fields import ScalarField, SimState
from .geometry import ConfigurationError
from .linsolve import HelmholtzOperator, SolveReport, SolverError, pcr
from .operators import cfl_from_velocity, face_divergence, face_velocity, taxis_fluxes

log = logging.getLogger(__name__)

VARIANTS = ("attraction_only", "attraction_repulsion")
# flag threshold for the bounds 0 <= u, 0 <= v <= v_sup0, 0 <= w <= w_sup0
VIOLATION_ATOL = 1e-9
STEP_SOLVER_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    variant: str
    chi: float
    xi: float = 0.0
    dt: float = 1e-5
    t_end: float = 1e-3
    cfl_safety: float = 0.9
    solver_tol: float = STEP_SOLVER_TOL

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.chi < 0 or self.xi < 0:
            raise ConfigurationError("chi and xi must be nonnegative")
        if self.variant == "attraction_only" and self.xi != 0:
            raise ConfigurationError("attraction_only model has no xi")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if not self.t_end > 0:
            raise ConfigurationError("t_end must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigurationError("cfl_safety must lie in (0, 1]")
        if not 0 < self.solver_tol < 1:
            raise ConfigurationError("solver_tol must lie in (0, 1)")

    @property
    def has_repellent(self) -> bool:
        return self.variant == "attraction_repulsion"


@dataclass
class StepOutcome:
    state: SimState
    dt: float
    reports: dict[str, SolveReport]
    cfl_clamped: bool = False
    violations: list[str] = field(default_factory=list)

    @property
    def bound_violation(self) -> bool:
        return bool(self.violations)

    @property
    def flags(self) -> list[str]:
        return (["cfl_clamped"] if self.cfl_clamped else []) + self.violations


class StepError(RuntimeError):
    """A step failed; carries the step index, time and (for solver failures) the report."""

    def __init__(self, message: str, step: int, t: float, report: SolveReport | None = None):
        super().__init__(f"step {step} (t={t:.6g}): {message}")
        self.step = step
        self.t = t
        self.report = report


class InvariantViolation(RuntimeError):
    """Run halted because a bound guaranteed by the continuous problem was broken."""

    def __init__(self, message: str, result: "RunResult"):
        super().__init__(message)
        self.result = result


def _solve(name: str, op: HelmholtzOperator, b: np.ndarray, params: ModelParams,
           state: SimState, reports: dict[str, SolveReport]) -> np.ndarray:
    try:
        x, rep = pcr(op, b, params.solver_tol, x0=b)
    except SolverError as exc:
        raise StepError(f"{name} solve failed: {exc}", state.step + 1, state.t, exc.report) from exc
    reports[name] = rep
    return x


def step(state: SimState, params: ModelParams, dt: float | None = None) -> StepOutcome:
    """Advance one step of at most ``dt`` (default ``params.dt``).

    The step is shortened to ``cfl_safety`` times the donor-cell limit when
    the fresh chemical gradients demand it; chemicals are then re-solved
    with the shorter step so that the limit holds for the gradients
    actually used.
    """
    grid = state.grid
    dt = params.dt if dt is None else float(dt)
    u = state.u.values
    has_w = params.has_repellent
    if has_w and state.w is None:
        raise ConfigurationError("attraction_repulsion model needs a w field")
    reports: dict[str, SolveReport] = {}
    clamped = False

    for _ in range(50):
        chem = HelmholtzOperator(grid, dt, u)
        v1 = _solve("v", chem, state.v.values, params, state, reports)
        w1 = _solve("w", chem, state.w.values, params, state, reports) if has_w else None
        vel = face_velocity(grid, v1, w1, params.chi, params.xi if has_w else 0.0)
        limit = cfl_from_velocity(grid, vel)
        if dt <= (params.cfl_safety * limit if not clamped else limit):
            break
        dt = params.cfl_safety * limit
        clamped = True
    else:
        raise StepError("CFL clamping did not settle", state.step + 1, state.t)

    u_star = u + dt * face_divergence(grid, taxis_fluxes(grid, u, vel))
    u1 = _solve("u", HelmholtzOperator(grid, dt), u_star, params, state, reports)

    new = state.evolve(
        ScalarField(grid, u1),
        ScalarField(grid, v1),
        ScalarField(grid, w1) if w1 is not None else state.w,
        dt,
    )
    return StepOutcome(new, dt, reports, clamped, new.bound_violations(VIOLATION_ATOL))


@dataclass
class RunResult:
    state: SimState
    records: list[DiagnosticsRecord]
    n_steps: int = 0
    n_clamped: int = 0
    halted: bool = False
    halt_reason: str = ""


Hook = Callable[[DiagnosticsRecord, SimState], None]


def run(initial: SimState, params: ModelParams, hooks: Iterable[Hook] = (),
        cadence: int = 1, recorder: Recorder | None = None,
        halt_on_violation: bool = True) -> RunResult:
    """Step from ``initial`` up to ``params.t_end``.

    A record is taken at t=0, every ``cadence`` steps and at the final
    step; each record is passed to every hook together with the state.
    """
    if cadence < 1:
        raise ConfigurationError("cadence must be >= 1")
    if params.has_repellent and initial.w is None:
        raise ConfigurationError("attraction_repulsion model needs a w field")
    hooks = list(hooks)
    recorder = recorder or Recorder.for_run(params, initial)
    state = initial
    result = RunResult(state, [])

    def emit(st: SimState, flags: Iterable[str]) -> None:
        rec = recorder(st, flags)
        result.records.append(rec)
        for hook in hooks:
            hook(rec, st)

    def halt(st: SimState, violations: list[str]) -> None:
        result.state = st
        result.halted = True
        result.halt_reason = ",".join(violations)
        raise InvariantViolation(f"step {st.step} (t={st.t:.6g}): {result.halt_reason}", result)

    initial_flags = state.bound_violations(VIOLATION_ATOL)
    emit(state, initial_flags)
    if initial_flags and halt_on_violation:
        halt(state, initial_flags)
    t_end = params.t_end
    # remaining time below this is round-off, not a step
    t_slack = 1e-9 * params.dt
    while t_end - state.t > t_slack:
        remaining = t_end - state.t
        request = params.dt if remaining > params.dt * (1 + 1e-9) else remaining
        outcome = step(state, params, request)
        state = outcome.state
        if not outcome.cfl_clamped and request == remaining:
            state.t = t_end
        result.n_steps += 1
        result.n_clamped += outcome.cfl_clamped
        done = t_end - state.t <= t_slack
        if outcome.bound_violation or done or state.step % cadence == 0:
            emit(state, outcome.flags)
        if outcome.bound_violation:
            log.warning("step %d t=%g bound violation %s", state.step, state.t, outcome.violations)
            if halt_on_violation:
                halt(state, outcome.violations)
    result.state = state
    return result


def initial_state(u: ScalarField, v: ScalarField, w: ScalarField | None = None) -> SimState:
    return SimState(u=u, v=v, w=w, t=0.0, step=0)
