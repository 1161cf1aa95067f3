"""Running scenarios and sweeps, writing their outputs, comparing 2D with 3D."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ..diagnostics import DiagnosticsRecord, Recorder, default_lyapunov_config, write_series
from ..fields import SimState, init_field, write_vtk
from ..geometry import ConfigurationError, build_grid
from ..stepper import InvariantViolation, RunResult, run
from .scenario import Scenario, SweepSpec, scenario_to_dict

log = logging.getLogger(__name__)


@dataclass
class Summary:
    name: str
    dimension: int
    chi: float
    xi: float
    initial: dict[str, Any]
    peak_max_u: float
    peak_time: float
    n_steps: int
    n_clamped: int
    final: dict[str, Any]
    outputs: dict[str, str] = field(default_factory=dict)
    halted: bool = False
    halt_reason: str = ""
    times: list[float] = field(default_factory=list, repr=False)
    max_u: list[float] = field(default_factory=list, repr=False)

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("times")
        d.pop("max_u")
        return d


def build_initial_state(s: Scenario) -> SimState:
    grid = build_grid(s.domain, s.cells_per_axis)
    u = init_field(grid, s.u0)
    v = init_field(grid, s.v0)
    w = init_field(grid, s.w0) if s.w0 is not None else None
    return SimState(u=u, v=v, w=w)


def make_recorder(s: Scenario, state: SimState) -> Recorder:
    """Recorder with the Lyapunov column when the parameters admit it."""
    rec = Recorder.for_run(s.params, state, s.lyapunov_k)
    if s.lyapunov_k is not None and rec.lyapunov_config is None:
        # an explicit k asks for the functional; surface the reason it is unavailable
        default_lyapunov_config(s.params, state.grid.dimension, state.v_sup0,
                                state.w_sup0 if state.w is not None else None, s.lyapunov_k)
    return rec


def summarize(s: Scenario, records: Sequence[DiagnosticsRecord], result: RunResult | None,
              outputs: dict[str, str] | None = None) -> Summary:
    times = [r.t for r in records]
    max_u = [r.max_u for r in records]
    i = int(np.argmax(max_u))
    last = records[-1]
    return Summary(
        name=s.name,
        dimension=s.dimension,
        chi=s.params.chi,
        xi=s.params.xi,
        initial=scenario_to_dict(s)["initial"],
        peak_max_u=max_u[i],
        peak_time=times[i],
        n_steps=result.n_steps if result else len(records) - 1,
        n_clamped=result.n_clamped if result else 0,
        final={k: v for k, v in asdict(last).items() if k != "flags"} | {"flags": list(last.flags)},
        outputs=outputs or {},
        halted=bool(result and result.halted),
        halt_reason=result.halt_reason if result else "",
        times=times,
        max_u=max_u,
    )


def run_scenario(s: Scenario, output_dir: str | Path | None = None,
                 write_outputs: bool = True) -> Summary:
    """Run ``s`` to completion, writing series.csv, VTK snapshots and summary.json.

    On a halting bound violation the partial outputs are still written and
    the :class:`InvariantViolation` is re-raised with ``summary`` attached.
    """
    out = Path(output_dir if output_dir is not None else s.output_dir)
    state = build_initial_state(s)
    grid = state.grid
    outputs: dict[str, str] = {}
    snapshots: list[str] = []

    def snapshot(st: SimState) -> None:
        fields = {"u": st.u, "v": st.v}
        if st.w is not None:
            fields["w"] = st.w
        path = write_vtk(out / f"fields_{st.step:06d}.vtk", grid, fields,
                         title=f"{s.name} t={st.t:.9g}")
        snapshots.append(str(path))

    hooks = []
    if write_outputs:
        out.mkdir(parents=True, exist_ok=True)
        snapshot(state)
        if s.snapshot_every:
            hooks.append(lambda rec, st: snapshot(st)
                         if st.step and st.step % s.snapshot_every == 0 else None)

    failure: InvariantViolation | None = None
    try:
        result = run(state, s.params, hooks=hooks, cadence=s.cadence,
                     recorder=make_recorder(s, state), halt_on_violation=s.halt_on_violation)
    except InvariantViolation as exc:
        failure = exc
        result = exc.result

    if write_outputs:
        final = result.state
        if not snapshots or not snapshots[-1].endswith(f"fields_{final.step:06d}.vtk"):
            snapshot(final)
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        outputs["series"] = str(write_series(out / "series.csv", result.records,
                                             header_comment=f"{s.name} generated {stamp}"))
        outputs["snapshots"] = ",".join(snapshots)
        outputs["summary"] = str(out / "summary.json")
    summary = summarize(s, result.records, result, outputs)
    if write_outputs:
        doc = summary.to_json() | {"scenario": scenario_to_dict(s)}
        Path(outputs["summary"]).write_text(json.dumps(doc, indent=2, default=_jsonable) + "\n")
    if failure is not None:
        failure.summary = summary
        raise failure
    return summary


def _jsonable(x: Any) -> Any:
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


# ------------------------------------------------------------------ sweeps


@dataclass
class SweepMember:
    value: float
    status: str
    summary: Summary | None = None


@dataclass
class SweepResult:
    parameter: str
    members: list[SweepMember]
    table_path: str = ""
    summary_path: str = ""

    def ok(self) -> list[SweepMember]:
        return [m for m in self.members if m.summary is not None and m.status == "ok"]


def _run_member(args: tuple[Scenario, str, bool]) -> SweepMember:
    s, out, write = args
    value = s.params.xi
    try:
        return SweepMember(value, "ok", run_scenario(s, out, write))
    except InvariantViolation as exc:
        return SweepMember(value, f"halted: {exc}", getattr(exc, "summary", None))
    except Exception as exc:  # member failures are recorded, the sweep goes on
        log.exception("sweep member %s=%g failed", "xi", value)
        return SweepMember(value, f"failed: {type(exc).__name__}: {exc}")


def common_time_table(members: Sequence[SweepMember], dt: float, t_end: float,
                      cadence: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """max_u of every member on the grid k * cadence * dt, by linear interpolation.

    Members that were never clamped recorded exactly these times, so their
    columns are the raw series.
    """
    n = int(math.floor(t_end / (cadence * dt) + 1e-9))
    times = np.arange(n + 1) * cadence * dt
    times[-1] = min(times[-1], t_end)
    if times[-1] < t_end:
        times = np.append(times, t_end)
    cols = []
    for m in members:
        if m.summary is None:
            cols.append(np.full(times.shape, np.nan))
            continue
        t = np.asarray(m.summary.times)
        y = np.asarray(m.summary.max_u)
        col = np.interp(times, t, y, right=np.nan)
        cols.append(col)
    return times, np.column_stack(cols) if cols else np.empty((times.size, 0))


def run_sweep(spec: SweepSpec, output_dir: str | Path | None = None,
              write_outputs: bool = True) -> SweepResult:
    out = Path(output_dir if output_dir is not None else spec.output_dir)
    jobs = []
    for value in spec.values:
        member = spec.base.with_overrides(xi=value, name=f"{spec.base.name}_xi{value:g}")
        jobs.append((member, str(out / f"xi_{value:g}"), write_outputs))
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            members = list(pool.map(_run_member, jobs))
    else:
        members = [_run_member(j) for j in jobs]
    result = SweepResult(spec.parameter, members)
    if not write_outputs:
        return result

    out.mkdir(parents=True, exist_ok=True)
    p = spec.base.params
    times, table = common_time_table(members, p.dt, p.t_end, spec.base.cadence)
    table_path = out / "sweep_max_u.csv"
    with table_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *(f"max_u_xi={m.value:g}" for m in members)])
        for t, row in zip(times, table):
            writer.writerow([f"{t:.17g}", *(f"{x:.17g}" for x in row)])
    summary_path = out / "sweep_summary.csv"
    with summary_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["xi", "status", "peak_max_u", "peak_time", "n_steps", "n_clamped"])
        for m in members:
            s = m.summary
            writer.writerow([f"{m.value:g}", m.status,
                             *(("", "", "", "") if s is None else
                               (f"{s.peak_max_u:.17g}", f"{s.peak_time:.17g}",
                                s.n_steps, s.n_clamped))])
    result.table_path = str(table_path)
    result.summary_path = str(summary_path)
    return result


# ------------------------------------------------------------ 2D vs 3D


@dataclass
class Comparison:
    peak_time_2d: float
    peak_time_3d: float
    peak_max_u_2d: float
    peak_max_u_3d: float
    earlier_in_2d: bool
    larger_in_3d: bool

    @property
    def verdict(self) -> str:
        return "confirmed" if self.earlier_in_2d and self.larger_in_3d else "inconclusive"

    def rows(self) -> list[tuple[str, str, str, str]]:
        return [
            ("peak time", f"{self.peak_time_2d:.6g}", f"{self.peak_time_3d:.6g}",
             "2D earlier" if self.earlier_in_2d else "NOT earlier in 2D"),
            ("peak max u", f"{self.peak_max_u_2d:.6g}", f"{self.peak_max_u_3d:.6g}",
             "3D larger" if self.larger_in_3d else "NOT larger in 3D"),
        ]

    def table(self) -> str:
        lines = [f"{'quantity':<12} {'2D':>14} {'3D':>14}  check"]
        lines += [f"{a:<12} {b:>14} {c:>14}  {d}" for a, b, c, d in self.rows()]
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def compare_2d_3d(summary_2d: Summary | None, summary_3d: Summary | None) -> Comparison:
    if summary_2d is None or summary_3d is None:
        raise ConfigurationError("comparison needs both a 2D and a 3D run")
    if summary_2d.dimension != 2 or summary_3d.dimension != 3:
        raise ConfigurationError(
            f"expected (2D, 3D) summaries, got ({summary_2d.dimension}D, {summary_3d.dimension}D)"
        )
    if summary_2d.chi != summary_3d.chi:
        raise ConfigurationError("2D and 3D runs use different chi")
    i2, i3 = summary_2d.initial, summary_3d.initial
    for key in ("amplitude", "sharpness"):
        if i2["u"].get(key) != i3["u"].get(key) or i2["v"].get(key) != i3["v"].get(key):
            raise ConfigurationError("2D and 3D runs use different initial data")
    return Comparison(
        summary_2d.peak_time, summary_3d.peak_time,
        summary_2d.peak_max_u, summary_3d.peak_max_u,
        earlier_in_2d=summary_2d.peak_time < summary_3d.peak_time,
        larger_in_3d=summary_3d.peak_max_u > summary_2d.peak_max_u,
    )


def load_summary(path: str | Path) -> Summary:
    """Rebuild a :class:`Summary` from summary.json (+ the series.csv next to it)."""
    from ..diagnostics import read_series

    path = Path(path)
    doc = json.loads(path.read_text())
    doc.pop("scenario", None)
    s = Summary(**doc)
    series = path.parent / "series.csv"
    if series.exists():
        recs = read_series(series)
        s.times = [r.t for r in recs]
        s.max_u = [r.max_u for r in recs]
    return s
