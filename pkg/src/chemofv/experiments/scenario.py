"""Scenario and sweep configuration: JSON documents, validation and presets.

Scenario document (all lengths dimensionless)::

    {
      "name": "circle2d",
      "domain": {"kind": "disk", "center": [0, 0], "radius": 1.0},
      "cells_per_axis": 128,
      "model": {"variant": "attraction_only", "chi": 20.0, "xi": 0.0,
                "dt": 1e-5, "t_end": 0.01, "cfl_safety": 0.9, "solver_tol": 1e-12},
      "initial": {"u": {"kind": "gaussian", "amplitude": 20, "sharpness": 30, "center": [0, 0]},
                  "v": {...}, "w": {...}},
      "output": {"directory": "runs/circle2d", "cadence": 1, "snapshot_every": 0},
      "halt_on_violation": true,
      "lyapunov_k": null
    }

``domain.lower``/``domain.upper`` default to the bounding box of a disk or
ball.  ``initial.w`` is required for ``attraction_repulsion`` and forbidden
otherwise.  ``snapshot_every`` = 0 writes VTK snapshots only at the first
and last step.  Unknown keys anywhere are rejected.

Sweep document::

    {"base": "sphere3d_ar" | {scenario document}, "parameter": "xi",
     "values": [0, 5, 10, 20], "output": {"directory": "runs/sweep"}, "workers": 1}
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from ..fields import InitialData
from ..geometry import ConfigurationError, DomainSpec
from ..stepper import ModelParams


class ScenarioError(ConfigurationError):
    """Malformed or invalid scenario / sweep document."""


@dataclass(frozen=True)
class Scenario:
    name: str
    domain: DomainSpec
    cells_per_axis: int | tuple[int, ...]
    params: ModelParams
    u0: InitialData
    v0: InitialData
    w0: InitialData | None = None
    cadence: int = 1
    snapshot_every: int = 0
    output_dir: str = "runs/scenario"
    halt_on_violation: bool = True
    lyapunov_k: float | None = None

    def __post_init__(self) -> None:
        if self.cadence < 1:
            raise ScenarioError("output.cadence must be >= 1")
        if self.snapshot_every < 0:
            raise ScenarioError("output.snapshot_every must be >= 0")
        if self.params.has_repellent and self.w0 is None:
            raise ScenarioError("initial.w is required for attraction_repulsion")
        if not self.params.has_repellent and self.w0 is not None:
            raise ScenarioError("initial.w given for attraction_only model")

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def with_overrides(self, **changes: Any) -> "Scenario":
        """Copy with scenario fields and/or model fields (``chi``, ``t_end``...) replaced."""
        model_keys = {"variant", "chi", "xi", "dt", "t_end", "cfl_safety", "solver_tol"}
        model = {k: changes.pop(k) for k in list(changes) if k in model_keys}
        params = replace(self.params, **model) if model else self.params
        return replace(self, params=params, **changes)


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    parameter: str
    values: tuple[float, ...]
    output_dir: str = "runs/sweep"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.parameter != "xi":
            raise ScenarioError(f"sweep parameter must be 'xi', got {self.parameter!r}")
        if not self.values:
            raise ScenarioError("sweep values must be nonempty")
        if any(v < 0 for v in self.values):
            raise ScenarioError("sweep values must be >= 0")
        if not self.base.params.has_repellent:
            raise ScenarioError("xi sweep needs an attraction_repulsion base scenario")
        if self.workers < 1:
            raise ScenarioError("workers must be >= 1")


# ---------------------------------------------------------------- parsing

_TOP = {"name", "description", "domain", "cells_per_axis", "model", "initial",
        "output", "halt_on_violation", "lyapunov_k"}
_DOMAIN = {"kind", "lower", "upper", "center", "radius"}
_MODEL = {"variant", "chi", "xi", "dt", "t_end", "cfl_safety", "solver_tol"}
_INITIAL = {"u", "v", "w"}
_DATA = {"kind", "amplitude", "sharpness", "center", "value", "table"}
_OUTPUT = {"directory", "cadence", "snapshot_every"}
_SWEEP = {"base", "parameter", "values", "output", "workers", "description"}
_SWEEP_OUTPUT = {"directory"}


def _check_keys(obj: Any, allowed: set[str], where: str, required: set[str] = frozenset()) -> None:
    if not isinstance(obj, Mapping):
        raise ScenarioError(f"{where or 'document'}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ScenarioError(f"{where + '.' if where else ''}{unknown[0]}: unknown key")
    missing = sorted(required - set(obj))
    if missing:
        raise ScenarioError(f"{where + '.' if where else ''}{missing[0]}: required key missing")


def _number(obj: Mapping, key: str, where: str, default: Any = None) -> Any:
    if key not in obj:
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"{where}.{key}: expected a number, got {val!r}")
    return val


def _field_error(where: str, exc: Exception) -> ScenarioError:
    return ScenarioError(f"{where}: {exc}")


def _parse_domain(d: Mapping) -> DomainSpec:
    _check_keys(d, _DOMAIN, "domain", {"kind"})
    kind = d["kind"]
    try:
        if kind in ("disk", "ball") and "lower" not in d and "upper" not in d:
            center = d.get("center", [0.0] * (2 if kind == "disk" else 3))
            radius = _number(d, "radius", "domain", 1.0)
            factory = DomainSpec.disk if kind == "disk" else DomainSpec.ball
            return factory(center, radius)
        if "lower" not in d or "upper" not in d:
            raise ScenarioError("domain.lower/upper: required for this domain")
        return DomainSpec(kind, tuple(d["lower"]), tuple(d["upper"]),
                          None if d.get("center") is None else tuple(d["center"]),
                          d.get("radius"))
    except ScenarioError:
        raise
    except (ConfigurationError, TypeError) as exc:
        raise _field_error("domain", exc) from exc


def _parse_data(d: Mapping, where: str) -> InitialData:
    _check_keys(d, _DATA, where, {"kind"})
    try:
        kind = d["kind"]
        if kind == "gaussian":
            return InitialData.gaussian(_number(d, "amplitude", where, 0.0),
                                        _number(d, "sharpness", where, 1.0),
                                        d.get("center"))
        if kind == "constant":
            return InitialData.constant(_number(d, "value", where, 0.0))
        if kind == "table":
            return InitialData.from_table(d.get("table") or [])
        return InitialData(kind)
    except (ConfigurationError, TypeError) as exc:
        raise _field_error(where, exc) from exc


def scenario_from_dict(doc: Mapping[str, Any]) -> Scenario:
    _check_keys(doc, _TOP, "", {"name", "domain", "cells_per_axis", "model", "initial"})
    domain = _parse_domain(doc["domain"])

    cells = doc["cells_per_axis"]
    if isinstance(cells, list):
        cells = tuple(cells)
    if not (isinstance(cells, int) and not isinstance(cells, bool)) and not (
        isinstance(cells, tuple) and all(isinstance(c, int) for c in cells)
    ):
        raise ScenarioError(f"cells_per_axis: expected an integer or list, got {cells!r}")

    m = doc["model"]
    _check_keys(m, _MODEL, "model", {"variant", "chi", "dt", "t_end"})
    kwargs = {k: _number(m, k, "model") for k in _MODEL - {"variant"} if k in m}
    for key in ("dt", "t_end"):
        if kwargs[key] <= 0:
            raise ScenarioError(f"model.{key}: must be positive, got {kwargs[key]!r}")
    try:
        params = ModelParams(variant=m["variant"], **kwargs)
    except ConfigurationError as exc:
        raise _field_error("model", exc) from exc

    init = doc["initial"]
    _check_keys(init, _INITIAL, "initial", {"u", "v"})
    u0 = _parse_data(init["u"], "initial.u")
    v0 = _parse_data(init["v"], "initial.v")
    w0 = _parse_data(init["w"], "initial.w") if "w" in init else None

    out = doc.get("output", {})
    _check_keys(out, _OUTPUT, "output")
    cadence = out.get("cadence", 1)
    snap = out.get("snapshot_every", 0)
    for key, val in (("cadence", cadence), ("snapshot_every", snap)):
        if isinstance(val, bool) or not isinstance(val, int):
            raise ScenarioError(f"output.{key}: expected an integer, got {val!r}")
    halt = doc.get("halt_on_violation", True)
    if not isinstance(halt, bool):
        raise ScenarioError("halt_on_violation: expected true/false")
    k = doc.get("lyapunov_k")
    if k is not None and (isinstance(k, bool) or not isinstance(k, (int, float)) or k <= 1):
        raise ScenarioError("lyapunov_k: expected a number > 1")

    return Scenario(
        name=str(doc["name"]),
        domain=domain,
        cells_per_axis=cells,
        params=params,
        u0=u0,
        v0=v0,
        w0=w0,
        cadence=cadence,
        snapshot_every=snap,
        output_dir=str(out.get("directory", f"runs/{doc['name']}")),
        halt_on_violation=halt,
        lyapunov_k=k,
    )


def _data_to_dict(d: InitialData) -> dict[str, Any]:
    if d.kind == "gaussian":
        out = {"kind": "gaussian", "amplitude": d.amplitude, "sharpness": d.sharpness}
        if d.center is not None:
            out["center"] = list(d.center)
        return out
    if d.kind == "constant":
        return {"kind": "constant", "value": d.value}
    return {"kind": "table", "table": list(d.table)}


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    dom: dict[str, Any] = {"kind": s.domain.kind, "lower": list(s.domain.lower),
                           "upper": list(s.domain.upper)}
    if s.domain.kind != "box":
        dom.update(center=list(s.domain.center), radius=s.domain.radius)
    p = s.params
    initial = {"u": _data_to_dict(s.u0), "v": _data_to_dict(s.v0)}
    if s.w0 is not None:
        initial["w"] = _data_to_dict(s.w0)
    return {
        "name": s.name,
        "domain": dom,
        "cells_per_axis": list(s.cells_per_axis) if isinstance(s.cells_per_axis, tuple)
        else s.cells_per_axis,
        "model": {"variant": p.variant, "chi": p.chi, "xi": p.xi, "dt": p.dt,
                  "t_end": p.t_end, "cfl_safety": p.cfl_safety, "solver_tol": p.solver_tol},
        "initial": initial,
        "output": {"directory": s.output_dir, "cadence": s.cadence,
                   "snapshot_every": s.snapshot_every},
        "halt_on_violation": s.halt_on_violation,
        "lyapunov_k": s.lyapunov_k,
    }


def _load_json(path: Path) -> Any:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_scenario(path_or_name: str | Path) -> Scenario:
    """Load a scenario JSON file, or a built-in preset by name."""
    from .presets import PRESETS

    if isinstance(path_or_name, str) and path_or_name in PRESETS:
        return scenario_from_dict(copy.deepcopy(PRESETS[path_or_name]))
    path = Path(path_or_name)
    if not path.exists():
        raise ScenarioError(f"{path}: no such file or preset (see `chemofv presets`)")
    return scenario_from_dict(_load_json(path))


def sweep_from_dict(doc: Mapping[str, Any]) -> SweepSpec:
    from .presets import PRESETS

    _check_keys(doc, _SWEEP, "", {"base", "parameter", "values"})
    base = doc["base"]
    if isinstance(base, str):
        if base not in PRESETS:
            raise ScenarioError(f"base: unknown preset {base!r}")
        base = copy.deepcopy(PRESETS[base])
    scenario = scenario_from_dict(base)
    values = doc["values"]
    if not isinstance(values, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
    ):
        raise ScenarioError("values: expected a list of numbers")
    out = doc.get("output", {})
    _check_keys(out, _SWEEP_OUTPUT, "output")
    workers = doc.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int):
        raise ScenarioError("workers: expected an integer")
    return SweepSpec(scenario, str(doc["parameter"]), tuple(float(v) for v in values),
                     str(out.get("directory", "runs/sweep")), workers)


def load_sweep(path_or_name: str | Path) -> SweepSpec:
    from .presets import SWEEP_PRESETS

    if isinstance(path_or_name, str) and path_or_name in SWEEP_PRESETS:
        return sweep_from_dict(copy.deepcopy(SWEEP_PRESETS[path_or_name]))
    path = Path(path_or_name)
    if not path.exists():
        raise ScenarioError(f"{path}: no such file or sweep preset")
    return sweep_from_dict(_load_json(path))
