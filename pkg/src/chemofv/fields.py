"""Cell-valued fields, initial data and the simulation state."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .geometry import ConfigurationError, Grid

# absolute round-off slack for nonnegative quantities
EPS_NN = 1e-12
# inactive cells in VTK dumps
VTK_SENTINEL = -1e30


@dataclass(eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_cells,):
            raise ConfigurationError(
                f"field has {self.values.size} values for {self.grid.n_cells} active cells"
            )

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)


@dataclass(frozen=True)
class InitialData:
    """One of ``gaussian`` (A exp(-s |x - c|^2)), ``constant`` or ``table``."""

    kind: str = "gaussian"
    amplitude: float = 0.0
    sharpness: float = 1.0
    center: tuple[float, ...] | None = None
    value: float = 0.0
    table: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind == "gaussian":
            if self.amplitude < 0:
                raise ConfigurationError("gaussian amplitude must be >= 0")
            if not self.sharpness > 0:
                raise ConfigurationError("gaussian sharpness must be > 0")
        elif self.kind == "constant":
            pass
        elif self.kind == "table":
            if self.table is None:
                raise ConfigurationError("table initial data needs values")
        else:
            raise ConfigurationError(f"unknown initial data kind {self.kind!r}")

    @classmethod
    def gaussian(cls, amplitude: float, sharpness: float, center=None) -> "InitialData":
        return cls("gaussian", amplitude=amplitude, sharpness=sharpness,
                   center=None if center is None else tuple(center))

    @classmethod
    def constant(cls, value: float) -> "InitialData":
        return cls("constant", value=value)

    @classmethod
    def from_table(cls, values: Sequence[float]) -> "InitialData":
        return cls("table", table=tuple(float(v) for v in values))


def init_field(grid: Grid, data: InitialData) -> ScalarField:
    """Sample initial data at the active cell centres."""
    if data.kind == "constant":
        return ScalarField(grid, np.full(grid.n_cells, float(data.value)))
    if data.kind == "table":
        table = np.asarray(data.table, dtype=float)
        if table.shape != (grid.n_cells,):
            raise ConfigurationError(
                f"initial table has {table.size} entries, grid has {grid.n_cells} cells"
            )
        return ScalarField(grid, table.copy())
    center = np.zeros(grid.dimension) if data.center is None else np.asarray(data.center, float)
    if center.shape != (grid.dimension,):
        raise ConfigurationError("gaussian center dimension does not match the grid")
    r2 = np.sum((grid.centers - center) ** 2, axis=1)
    return ScalarField(grid, data.amplitude * np.exp(-data.sharpness * r2))


def field_extrema(f: ScalarField) -> tuple[float, float]:
    return float(f.values.min()), float(f.values.max())


@dataclass(eq=False)
class SimState:
    """The triple (u, v, w) at time ``t``.

    ``w`` is ``None`` for the attraction-only model.  ``v_sup0``/``w_sup0``
    are the initial maxima; they are fixed at construction and never
    updated, since the chemical bounds compare against initial data.
    """

    u: ScalarField
    v: ScalarField
    w: ScalarField | None = None
    t: float = 0.0
    step: int = 0
    v_sup0: float = field(default=np.nan)
    w_sup0: float = field(default=np.nan)

    def __post_init__(self) -> None:
        grids = {id(f.grid) for f in (self.u, self.v, self.w) if f is not None}
        if len(grids) != 1:
            raise ConfigurationError("u, v and w must live on one grid")
        if np.isnan(self.v_sup0):
            self.v_sup0 = float(self.v.values.max())
        if self.w is not None and np.isnan(self.w_sup0):
            self.w_sup0 = float(self.w.values.max())

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def evolve(self, u, v, w, dt: float) -> "SimState":
        return replace(self, u=u, v=v, w=w, t=self.t + dt, step=self.step + 1)

    def bound_violations(self, tol: float = EPS_NN) -> list[str]:
        """Names of the nonnegativity / initial-maximum bounds broken by more than ``tol``."""
        flags = []
        if self.u.values.min() < -tol:
            flags.append("u_negative")
        for name, f, sup in (("v", self.v, self.v_sup0), ("w", self.w, self.w_sup0)):
            if f is None:
                continue
            lo, hi = field_extrema(f)
            if lo < -tol:
                flags.append(f"{name}_negative")
            if hi > sup + tol:
                flags.append(f"{name}_above_initial_max")
        return flags


def write_vtk(path: str | Path, grid: Grid, fields: Mapping[str, ScalarField],
              title: str = "chemofv fields") -> Path:
    """Legacy ASCII STRUCTURED_POINTS dump with cell data.

    The dataset is the lattice of cell corners; inactive cells carry
    ``VTK_SENTINEL``.
    """
    path = Path(path)
    dims = [n + 1 for n in grid.shape] + [1] * (3 - grid.dimension)
    origin = list(grid.domain.lower) + [0.0] * (3 - grid.dimension)
    spacing = list(grid.spacing) + [1.0] * (3 - grid.dimension)
    n_lattice = int(np.prod(grid.shape))
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS " + " ".join(str(d) for d in dims),
        "ORIGIN " + " ".join(f"{x:.15g}" for x in origin),
        "SPACING " + " ".join(f"{x:.15g}" for x in spacing),
        f"CELL_DATA {n_lattice}",
    ]
    with path.open("w") as fh:
        fh.write("\n".join(lines) + "\n")
        for name, f in fields.items():
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            # VTK orders points with x fastest
            lattice = grid.to_lattice(f.values, fill=VTK_SENTINEL).transpose()
            np.savetxt(fh, lattice.reshape(-1, 1), fmt="%.15g")
    return path


def read_vtk_cell_data(path: str | Path) -> tuple[tuple[int, ...], dict[str, np.ndarray]]:
    """Parse files written by :func:`write_vtk` back into lattice arrays."""
    tokens = Path(path).read_text().split("\n")
    dims = None
    out: dict[str, np.ndarray] = {}
    i = 0
    while i < len(tokens):
        line = tokens[i].strip()
        if line.startswith("DIMENSIONS"):
            dims = tuple(int(x) - 1 for x in line.split()[1:])
            dims = tuple(d for d in dims if d > 0)
        elif line.startswith("SCALARS"):
            name = line.split()[1]
            n = int(np.prod(dims))
            vals = np.array([float(x) for x in tokens[i + 2:i + 2 + n]])
            out[name] = vals.reshape(tuple(reversed(dims))).transpose()
            i += 2 + n
            continue
        i += 1
    if dims is None:
        raise ValueError(f"{path}: no DIMENSIONS line")
    return dims, out


def write_field_csv(path: str | Path, grid: Grid, fields: Mapping[str, ScalarField]) -> Path:
    """Flat table: cell index, centre coordinates, one column per field."""
    path = Path(path)
    coords = ["x", "y", "z"][: grid.dimension]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell", *coords, *fields])
        cols = [f.values for f in fields.values()]
        for c in range(grid.n_cells):
            writer.writerow(
                [c, *(f"{x:.15g}" for x in grid.centers[c]), *(f"{col[c]:.15g}" for col in cols)]
            )
    return path
