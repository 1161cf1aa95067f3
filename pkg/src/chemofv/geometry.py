"""Structured cell-centred grids with staircase masking of disks and balls.

Cells whose centre lies inside the domain are *active*.  Only faces shared
by two active cells are stored; every other face carries zero flux, which
is how homogeneous Neumann conditions enter all operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DOMAIN_KINDS = ("box", "disk", "ball")


class ConfigurationError(ValueError):
    """Invalid domain, grid or scenario configuration."""


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    center: tuple[float, ...] | None = None
    radius: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", tuple(float(x) for x in self.lower))
        object.__setattr__(self, "upper", tuple(float(x) for x in self.upper))
        if self.center is not None:
            object.__setattr__(self, "center", tuple(float(x) for x in self.center))
        if self.kind not in DOMAIN_KINDS:
            raise ConfigurationError(f"unknown domain kind {self.kind!r}")
        if len(self.lower) != len(self.upper):
            raise ConfigurationError("lower and upper extents differ in length")
        if self.dimension not in (2, 3):
            raise ConfigurationError(
                f"domain dimension must be 2 or 3, got {self.dimension}"
            )
        for lo, hi in zip(self.lower, self.upper):
            if not lo < hi:
                raise ConfigurationError(f"extents not ordered: {lo} >= {hi}")
        if self.kind == "box":
            return
        want = 2 if self.kind == "disk" else 3
        if self.dimension != want:
            raise ConfigurationError(
                f"{self.kind} requires dimension {want}, extents give {self.dimension}"
            )
        if self.center is None or len(self.center) != want:
            raise ConfigurationError(f"{self.kind} needs a {want}-component center")
        if self.radius is None or not self.radius > 0:
            raise ConfigurationError("radius must be positive")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float]) -> "DomainSpec":
        return cls("box", tuple(lower), tuple(upper))

    @classmethod
    def disk(cls, center=(0.0, 0.0), radius: float = 1.0) -> "DomainSpec":
        """Disk with a bounding box that fits it exactly."""
        c = tuple(float(x) for x in center)
        return cls("disk", tuple(x - radius for x in c), tuple(x + radius for x in c), c, radius)

    @classmethod
    def ball(cls, center=(0.0, 0.0, 0.0), radius: float = 1.0) -> "DomainSpec":
        c = tuple(float(x) for x in center)
        return cls("ball", tuple(x - radius for x in c), tuple(x + radius for x in c), c, radius)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.kind == "box":
            lo, hi = np.asarray(self.lower), np.asarray(self.upper)
            return np.all((points >= lo) & (points <= hi), axis=-1)
        d2 = np.sum((points - np.asarray(self.center)) ** 2, axis=-1)
        return d2 < self.radius**2


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable masked lattice.

    Active cells are numbered in C order of the lattice.  ``face_cells[f]``
    holds ``(first, second)`` with ``second`` the neighbour in the positive
    direction of ``face_axis[f]``.
    """

    domain: DomainSpec
    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    mask: np.ndarray
    index_map: np.ndarray
    centers: np.ndarray
    face_cells: np.ndarray
    face_axis: np.ndarray
    # per-axis face area and face area / centre distance
    axis_area: tuple[float, ...] = field(repr=False)
    axis_coupling: tuple[float, ...] = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def n_cells(self) -> int:
        return int(self.centers.shape[0])

    @property
    def n_faces(self) -> int:
        return int(self.face_cells.shape[0])

    @property
    def h(self) -> float:
        """Smallest spacing; the length scale used by the CFL bound."""
        return min(self.spacing)

    @property
    def face_area(self) -> np.ndarray:
        return np.asarray(self.axis_area)[self.face_axis]

    @property
    def face_distance(self) -> np.ndarray:
        return np.asarray(self.spacing)[self.face_axis]

    @property
    def face_coupling(self) -> np.ndarray:
        """Area over centre distance, per face."""
        return np.asarray(self.axis_coupling)[self.face_axis]

    def to_lattice(self, values: np.ndarray, fill: float = np.nan) -> np.ndarray:
        out = np.full(self.shape, fill, dtype=float)
        out[self.mask] = values
        return out

    def from_lattice(self, array: np.ndarray) -> np.ndarray:
        return np.asarray(array, dtype=float)[self.mask]


def _lattice_faces(index_map: np.ndarray, axis: int) -> np.ndarray:
    n = index_map.shape[axis]
    first = np.take(index_map, np.arange(n - 1), axis=axis)
    second = np.take(index_map, np.arange(1, n), axis=axis)
    both = (first >= 0) & (second >= 0)
    return np.stack([first[both], second[both]], axis=1)


def build_grid(
    spec: DomainSpec,
    cells_per_axis: int | Sequence[int],
    mask: np.ndarray | None = None,
) -> Grid:
    """Build the masked grid for ``spec``.

    ``mask`` is an optional extra lattice-shaped boolean array AND-ed with the
    domain predicate (used to carve small test configurations).
    """
    n = spec.dimension
    if np.ndim(cells_per_axis) == 0:
        shape = (int(cells_per_axis),) * n
    else:
        shape = tuple(int(c) for c in cells_per_axis)
    if len(shape) != n:
        raise ConfigurationError(
            f"cells_per_axis has {len(shape)} entries for a {n}D domain"
        )
    if min(shape) < 2:
        raise ConfigurationError("need at least 2 cells per axis")

    lower = np.asarray(spec.lower)
    upper = np.asarray(spec.upper)
    spacing = (upper - lower) / np.asarray(shape)
    axes = [lower[a] + (np.arange(shape[a]) + 0.5) * spacing[a] for a in range(n)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    active = spec.contains(mesh)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != shape:
            raise ConfigurationError(f"mask shape {mask.shape} != grid shape {shape}")
        active &= mask
    if not active.any():
        raise ConfigurationError("grid has no active cells")

    index_map = np.full(shape, -1, dtype=np.int64)
    index_map[active] = np.arange(int(active.sum()))
    centers = mesh[active]

    per_axis = [_lattice_faces(index_map, a) for a in range(n)]
    face_cells = np.concatenate(per_axis, axis=0) if per_axis else np.empty((0, 2), int)
    face_axis = np.concatenate(
        [np.full(len(p), a, dtype=np.int64) for a, p in enumerate(per_axis)]
    )
    volume = float(np.prod(spacing))
    axis_area = tuple(volume / spacing[a] for a in range(n))
    axis_coupling = tuple(axis_area[a] / spacing[a] for a in range(n))

    return Grid(
        domain=spec,
        shape=shape,
        spacing=tuple(float(s) for s in spacing),
        mask=_freeze(active),
        index_map=_freeze(index_map),
        centers=_freeze(centers),
        face_cells=_freeze(face_cells.astype(np.int64)),
        face_axis=_freeze(face_axis),
        axis_area=axis_area,
        axis_coupling=axis_coupling,
    )


def active_volume(grid: Grid) -> float:
    return grid.n_cells * grid.cell_volume
