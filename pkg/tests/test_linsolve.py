import numpy as np
import pytest
from hypothesis import given, settings

from chemofv.fields import EPS_NN, ScalarField
from chemofv.geometry import DomainSpec, build_grid
from chemofv.linsolve import (
    DEFAULT_TOL,
    HelmholtzOperator,
    SolverError,
    default_max_iter,
    pcr,
    solve_spd,
)
from oracles import dense_laplacian
from strategies import grids, seeds


def pair_grid():
    mask = np.zeros((3, 3), bool)
    mask[0, 0] = mask[1, 0] = True
    return build_grid(DomainSpec.box([0, 0], [3, 3]), 3, mask=mask)


def test_identity_when_dt_zero():
    g = build_grid(DomainSpec.disk(), 12)
    b = ScalarField(g, np.random.default_rng(1).random(g.n_cells))
    x, rep = solve_spd(HelmholtzOperator(g, 0.0), b)
    assert rep.converged and rep.iterations <= 1
    assert np.allclose(x.values, b.values, rtol=1e-14)


def test_two_cell_hand_solve():
    g = pair_grid()
    op = HelmholtzOperator(g, 1.0)
    # A/V = 1: [[2, -1], [-1, 2]] x = (1, 0)
    assert np.allclose(op.dense(), [[2, -1], [-1, 2]])
    x, rep = solve_spd(op, ScalarField(g, [1.0, 0.0]), tol=1e-12)
    assert x.values == pytest.approx([2 / 3, 1 / 3], rel=1e-12)
    assert x.values == pytest.approx(np.linalg.solve([[2, -1], [-1, 2]], [1, 0]), rel=1e-12)


def test_known_solution_recovered():
    g = build_grid(DomainSpec.ball(), 10)
    a = np.random.default_rng(2).random(g.n_cells) * 30
    op = HelmholtzOperator(g, 1e-3, a)
    b = ScalarField(g, op.apply(np.ones(g.n_cells)))
    x, _ = solve_spd(op, b)
    assert np.allclose(x.values, 1.0, rtol=1e-9)


def test_zero_rhs():
    g = pair_grid()
    x, rep = solve_spd(HelmholtzOperator(g, 1.0), ScalarField(g, [0.0, 0.0]))
    assert rep.converged and not x.values.any()


@settings(max_examples=30, deadline=None)
@given(grids(max_cells=10), seeds)
def test_matches_dense_direct_solve(g, seed):
    rng = np.random.default_rng(seed)
    dt = rng.uniform(1e-4, 1.0)
    a = rng.random(g.n_cells) * rng.uniform(0, 100)
    op = HelmholtzOperator(g, dt, a)
    A = np.eye(g.n_cells) + dt * np.diag(a) - dt * dense_laplacian(g)
    assert np.allclose(op.dense(), A, rtol=1e-13, atol=1e-12 * np.abs(A).max())
    b = rng.standard_normal(g.n_cells)
    x, rep = pcr(op, b, tol=1e-12)
    ref = np.linalg.solve(A, b)
    assert np.linalg.norm(x - ref) <= 1e-8 * np.linalg.norm(ref)
    assert np.linalg.norm(A @ x - b) <= 1e-12 * np.linalg.norm(b) * 1.0001


@settings(max_examples=40, deadline=None)
@given(grids(), seeds)
def test_nonnegative_rhs_gives_nonnegative_solution(g, seed):
    rng = np.random.default_rng(seed)
    b = rng.random(g.n_cells) * (rng.random(g.n_cells) < 0.3)
    op = HelmholtzOperator(g, rng.uniform(1e-3, 10), rng.random(g.n_cells) * 50)
    x, _ = pcr(op, b)
    assert x.min() >= -EPS_NN * max(1.0, b.max())


@settings(max_examples=40, deadline=None)
@given(grids(), seeds)
def test_preconditioned_residual_history(g, seed):
    rng = np.random.default_rng(seed)
    op = HelmholtzOperator(g, rng.uniform(1e-3, 1.0), rng.random(g.n_cells))
    x, rep = pcr(op, rng.standard_normal(g.n_cells), tol=1e-10)
    h = np.array(rep.history)
    assert rep.converged and rep.residual <= rep.tol
    assert np.all(h[1:] <= h[:-1] * (1 + 1e-8)), h


def test_operator_symmetry_and_matrix_free_agreement():
    g = build_grid(DomainSpec.disk(), 15)
    op = HelmholtzOperator(g, 0.01, np.linspace(0, 5, g.n_cells))
    M = op.dense()
    assert np.allclose(M, M.T, rtol=0, atol=1e-13)
    assert np.all(np.linalg.eigvalsh(M) > 0)
    x = np.random.default_rng(4).random(g.n_cells)
    assert np.allclose(op.apply(x), op.apply_matrix_free(x), rtol=1e-14, atol=1e-13)
    assert np.allclose(op.diagonal(), np.diag(M), rtol=1e-14)


def test_non_convergence_is_explicit():
    g = build_grid(DomainSpec.box([0, 0], [1, 1]), 30)
    op = HelmholtzOperator(g, 10.0)
    with pytest.raises(SolverError) as info:
        pcr(op, np.random.default_rng(0).random(g.n_cells), tol=1e-12, max_iter=2)
    rep = info.value.report
    assert not rep.converged and rep.iterations == 2 and rep.residual > 1e-12


@pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3])
def test_tolerance_range(tol):
    g = pair_grid()
    with pytest.raises(ValueError):
        pcr(HelmholtzOperator(g, 1.0), np.ones(2), tol=tol)


def test_invalid_inputs():
    g = pair_grid()
    with pytest.raises(ValueError):
        pcr(HelmholtzOperator(g, 1.0), np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        HelmholtzOperator(g, 1.0, np.array([-1.0, 0.0]))
    with pytest.raises(ValueError):
        HelmholtzOperator(g, -1.0)


def test_defaults():
    assert DEFAULT_TOL == 1e-10
    assert default_max_iter(build_grid(DomainSpec.box([0, 0], [1, 1]), 8)) == 500
    assert default_max_iter(build_grid(DomainSpec.box([0, 0], [1, 1]), 64)) == 640
