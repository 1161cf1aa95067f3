"""Jacobi-preconditioned conjugate residual solver for implicit diffusion-absorption steps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import ScalarField
from .geometry import Grid
from .operators import laplacian_matrix, laplacian_values

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class HelmholtzOperator:
    """x -> x + dt a x - dt L x, an SPD M-matrix for a >= 0, dt >= 0.

    Cells have equal volume, so symmetry in the volume-weighted inner
    product is plain symmetry and the solver runs in the Euclidean one.
    """

    grid: Grid
    dt: float
    absorption: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.dt < 0:
            raise ValueError("dt must be nonnegative")
        if self.absorption is not None:
            a = np.asarray(self.absorption, dtype=float)
            if a.shape != (self.grid.n_cells,):
                raise ValueError("absorption must have one value per active cell")
            if a.min() < 0:
                raise ValueError("absorption must be nonnegative")
            object.__setattr__(self, "absorption", a)

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = x - self.dt * (laplacian_matrix(self.grid) @ x)
        if self.absorption is not None:
            out += self.dt * self.absorption * x
        return out

    def apply_matrix_free(self, x: np.ndarray) -> np.ndarray:
        """Reference application through the face loop (no assembled matrix)."""
        out = x - self.dt * laplacian_values(self.grid, x)
        if self.absorption is not None:
            out += self.dt * self.absorption * x
        return out

    def diagonal(self) -> np.ndarray:
        g = self.grid
        c = g.face_coupling
        degree = (np.bincount(g.face_cells[:, 0], c, g.n_cells)
                  + np.bincount(g.face_cells[:, 1], c, g.n_cells)) / g.cell_volume
        d = 1.0 + self.dt * degree
        if self.absorption is not None:
            d += self.dt * self.absorption
        return d

    def dense(self) -> np.ndarray:
        """Assembled matrix, for small-size oracles only."""
        n = self.grid.n_cells
        return np.column_stack([self.apply_matrix_free(e) for e in np.eye(n)])


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    tol: float
    history: list[float] = field(default_factory=list, repr=False)


class SolverError(RuntimeError):
    def __init__(self, message: str, report: SolveReport):
        super().__init__(message)
        self.report = report


def default_max_iter(grid: Grid) -> int:
    return max(500, int(math.ceil(10 * grid.n_cells ** (1.0 / grid.dimension))))


def pcr(op: HelmholtzOperator, b: np.ndarray, tol: float = DEFAULT_TOL,
        max_iter: int | None = None, x0: np.ndarray | None = None
        ) -> tuple[np.ndarray, SolveReport]:
    """Jacobi-preconditioned conjugate residual iteration.

    Each iterate minimises sqrt(r . M^-1 r) over the Krylov space, so
    ``report.history`` (that norm per iterate) never increases, which plain
    CG would not guarantee.  Raises :class:`SolverError` if ``tol`` (relative
    2-norm residual) is not reached.
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    b = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side is not finite")
    if max_iter is None:
        max_iter = default_max_iter(op.grid)

    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), SolveReport(0, 0.0, True, tol, [0.0])

    inv_diag = 1.0 / op.diagonal()
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    history: list[float] = []
    it = 0
    stalled = False
    while True:
        # (re)start from the true residual; restarts only happen when the
        # recursively updated residual has drifted below tol on its own
        r = b - op.apply(x)
        true_rel = float(np.linalg.norm(r)) / bnorm
        if true_rel <= tol or it >= max_iter or stalled:
            break
        z = inv_diag * r
        az = op.apply(z)
        p, ap = z.copy(), az.copy()
        zaz = float(z @ az)
        history.append(math.sqrt(max(float(r @ z), 0.0)))
        rel = true_rel
        while rel > tol and it < max_iter:
            m_ap = inv_diag * ap
            denom = float(ap @ m_ap)
            if not denom > 0.0:
                # residual already at round-off level; no further progress possible
                stalled = True
                break
            alpha = zaz / denom
            x += alpha * p
            r -= alpha * ap
            z -= alpha * m_ap
            az = op.apply(z)
            zaz_new = float(z @ az)
            history.append(math.sqrt(max(float(r @ z), 0.0)))
            beta = zaz_new / zaz
            zaz = zaz_new
            p *= beta
            p += z
            ap *= beta
            ap += az
            rel = float(np.linalg.norm(r)) / bnorm
            it += 1

    report = SolveReport(it, true_rel, true_rel <= tol, tol, history)
    if not report.converged:
        raise SolverError(
            f"solver did not reach tol={tol:g} in {it} iterations (residual {true_rel:.3e})",
            report,
        )
    return x, report


def solve_spd(op: HelmholtzOperator, b: ScalarField, tol: float = DEFAULT_TOL,
              max_iter: int | None = None) -> tuple[ScalarField, SolveReport]:
    x, report = pcr(op, b.values, tol, max_iter)
    return ScalarField(op.grid, x), report
