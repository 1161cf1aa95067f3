"""Finite-volume operators on masked grids.

All fluxes live on interior faces only, so the Neumann condition never
needs special casing: a boundary cell simply has fewer faces.
"""

from __future__ import annotations

import functools
import math

import numpy as np
import scipy.sparse as sp

from .fields import ScalarField
from .geometry import Grid


def _ends(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    return grid.face_cells[:, 0], grid.face_cells[:, 1]


def face_divergence(grid: Grid, flux: np.ndarray) -> np.ndarray:
    """Net inflow per unit volume from face fluxes oriented first -> second."""
    first, second = _ends(grid)
    n = grid.n_cells
    net = np.bincount(second, flux, n) - np.bincount(first, flux, n)
    return net / grid.cell_volume


def laplacian_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    first, second = _ends(grid)
    flux = grid.face_coupling * (values[first] - values[second])
    return face_divergence(grid, flux)


def laplacian_apply(grid: Grid, f: ScalarField) -> ScalarField:
    """(1/V) sum_faces A (f_nb - f_c) / h, zero flux through masked faces."""
    return ScalarField(grid, laplacian_values(grid, f.values))


@functools.lru_cache(maxsize=8)
def laplacian_matrix(grid: Grid) -> sp.csr_matrix:
    """CSR copy of the Laplacian stencil, assembled from the face list.

    Same entries as :func:`laplacian_apply`; only used where repeated
    application dominates the run time.
    """
    first, second = _ends(grid)
    c = grid.face_coupling / grid.cell_volume
    rows = np.concatenate([first, second, first, second])
    cols = np.concatenate([second, first, first, second])
    data = np.concatenate([c, c, -c, -c])
    n = grid.n_cells
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def grad_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    first, second = _ends(grid)
    return (values[second] - values[first]) / grid.face_distance


def grad_on_faces(grid: Grid, f: ScalarField) -> np.ndarray:
    """Two-point normal derivative per interior face, first -> second."""
    return grad_values(grid, f.values)


def face_velocity(grid: Grid, v: np.ndarray, w: np.ndarray | None,
                  chi: float, xi: float) -> np.ndarray:
    """Taxis velocity chi grad v - xi grad w on each face."""
    vel = chi * grad_values(grid, v)
    if w is not None and xi != 0.0:
        vel = vel - xi * grad_values(grid, w)
    return vel


def taxis_fluxes(grid: Grid, u: np.ndarray, velocity: np.ndarray) -> np.ndarray:
    """Donor-cell face fluxes (amount per time) for the given face velocities."""
    first, second = _ends(grid)
    donor = np.where(velocity > 0.0, u[first], u[second])
    return grid.face_area * velocity * donor


def taxis_divergence(grid: Grid, u: ScalarField, v: ScalarField,
                     w_opt: ScalarField | None, chi: float, xi: float) -> ScalarField:
    """-div(u V) with V = chi grad v - xi grad w, u upwinded."""
    if chi < 0 or xi < 0:
        raise ValueError("chi and xi must be nonnegative")
    vel = face_velocity(grid, v.values, None if w_opt is None else w_opt.values, chi, xi)
    return ScalarField(grid, face_divergence(grid, taxis_fluxes(grid, u.values, vel)))


def cfl_from_velocity(grid: Grid, velocity: np.ndarray) -> float:
    vmax = float(np.abs(velocity).max()) if velocity.size else 0.0
    if vmax == 0.0:
        return math.inf
    return grid.h / (2 * grid.dimension * vmax)


def cfl_max_dt(grid: Grid, v: ScalarField, w_opt: ScalarField | None,
               chi: float, xi: float) -> float:
    """h / (2 n max|V|); +inf when no face carries velocity."""
    vel = face_velocity(grid, v.values, None if w_opt is None else w_opt.values, chi, xi)
    return cfl_from_velocity(grid, vel)
