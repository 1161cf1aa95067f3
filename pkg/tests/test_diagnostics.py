import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemofv.diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    Recorder,
    check_series,
    default_k,
    default_lyapunov_config,
    lk_integral,
    lk_norm,
    lyapunov,
    lyapunov_nonincreasing,
    mass,
    read_series,
    thresholds,
    write_series,
)
from chemofv.fields import InitialData, ScalarField, SimState, init_field
from chemofv.geometry import DomainSpec, build_grid
from chemofv.stepper import ModelParams, run


@pytest.fixture(scope="module")
def unit_box():
    return build_grid(DomainSpec.box([0, 0], [1, 1]), 8)


def test_mass_examples(unit_box):
    assert mass(ScalarField(unit_box, np.full(64, 2.0))) == pytest.approx(2.0, rel=1e-14)
    assert mass(ScalarField(unit_box, np.zeros(64))) == 0.0
    g = build_grid(DomainSpec.box([-1, -1], [1, 1]), 400)
    bell = init_field(g, InitialData.gaussian(20, 30))
    assert mass(bell) == pytest.approx(20 * math.pi / 30, rel=1e-6)
    assert 20 * math.pi / 30 == pytest.approx(2.094, abs=5e-4)


def test_lk_examples(unit_box):
    c = ScalarField(unit_box, np.full(64, 3.0))
    assert lk_norm(c, 2.5) == pytest.approx(3.0 * 1.0 ** (1 / 2.5))
    g = build_grid(DomainSpec.box([0, 0], [2, 3]), (4, 3))
    f = ScalarField(g, np.random.default_rng(0).random(g.n_cells))
    assert lk_norm(f, 1.0) == pytest.approx(mass(f), rel=1e-14)
    assert lk_norm(ScalarField(g, np.full(g.n_cells, 3.0)), 3) == pytest.approx(3.0 * 6 ** (1 / 3))

    mask = np.array([[True, False], [True, False]])
    pair = build_grid(DomainSpec.box([0, 0], [2, 1]), (2, 2), mask=mask)
    assert pair.cell_volume == 0.5
    assert lk_norm(ScalarField(pair, [1.0, 2.0]), 2) == pytest.approx(math.sqrt(2.5), rel=1e-15)


def test_lk_rejects_negative(unit_box):
    vals = np.ones(64)
    vals[3] = -1e-6
    with pytest.raises(ValueError):
        lk_norm(ScalarField(unit_box, vals), 2)
    vals[3] = -1e-13  # round-off slack is tolerated
    assert lk_integral(ScalarField(unit_box, vals), 2) == pytest.approx(63 / 64)


def test_default_k():
    assert default_k(2) == 1.5 and default_k(3) == 2.0


def test_lyapunov_config_values():
    p = ModelParams("attraction_repulsion", chi=1e-3, xi=1e-3)
    cfg = default_lyapunov_config(p, 3, v_sup0=1.0, w_sup0=2.0, k=2.0)
    assert cfg.eps1_sq == pytest.approx(0.2475) and cfg.eps3_sq == pytest.approx(0.2475)
    assert cfg.eps2_sq == pytest.approx(0.99 / 2e-3) and cfg.eps4_sq == pytest.approx(0.99 / 2e-3)
    assert cfg.beta_sq == pytest.approx(0.2475 / 20)
    assert cfg.gamma_sq == pytest.approx(0.2475 / 80)
    assert cfg.e_set_margin() > 0
    assert cfg.weight_bound() == pytest.approx(math.exp(0.2475 / 20 + 0.2475 / 80 * 4))


@pytest.mark.parametrize("chi, xi, word", [(0.05, 1e-3, "chi"), (0.01, 0.05, "xi"), (0.0, 1e-3, "chi")])
def test_lyapunov_config_thresholds(chi, xi, word):
    # k=2, sups 1 -> admissible range (0, 0.05)
    p = ModelParams("attraction_repulsion", chi=chi, xi=xi)
    with pytest.raises(ValueError, match=word):
        default_lyapunov_config(p, 3, 1.0, 1.0, k=2.0)


def test_lyapunov_config_attraction_only():
    cfg = default_lyapunov_config(ModelParams("attraction_only", chi=0.01), 2, 1.0, None)
    assert cfg.k == 1.5 and cfg.gamma_sq == 0 and cfg.eps3_sq == 0 and cfg.eps4_sq == 0
    assert cfg.e_set_margin() > 0


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([2, 3]), st.floats(1.01, 6.0), st.floats(0.01, 0.99),
       st.floats(0.01, 0.99), st.floats(0.1, 50), st.floats(0.1, 50))
def test_config_always_inside_admissible_set(n, k, a, b, vs, ws):
    p = ModelParams("attraction_repulsion", chi=a / (10 * k * vs), xi=b / (10 * k * ws))
    cfg = default_lyapunov_config(p, n, vs, ws, k)
    assert cfg.e_set_margin() > 0


def test_lyapunov_examples(unit_box):
    p = ModelParams("attraction_repulsion", chi=0.01, xi=0.01)
    cfg = default_lyapunov_config(p, 2, 1.0, 1.0, k=2.0)
    ones, zeros = ScalarField(unit_box, np.ones(64)), ScalarField(unit_box, np.zeros(64))
    assert lyapunov(SimState(ones, zeros, zeros), cfg) == pytest.approx(1.0, rel=1e-14)
    c = 0.7
    vc = ScalarField(unit_box, np.full(64, c))
    assert lyapunov(SimState(ones, vc, zeros), cfg) == pytest.approx(math.exp(cfg.beta_sq * c**2))


def test_lyapunov_overflow_guard(unit_box):
    p = ModelParams("attraction_only", chi=0.01)
    cfg = default_lyapunov_config(p, 2, 1e-3, None)
    big = ScalarField(unit_box, np.full(64, 10.0))
    with pytest.raises(OverflowError):
        lyapunov(SimState(big, big), cfg)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lyapunov_sandwich(seed):
    rng = np.random.default_rng(seed)
    g = build_grid(DomainSpec.disk(), int(rng.integers(4, 16)))
    vs, ws = rng.uniform(0.1, 30, 2)
    k = rng.uniform(1.1, 4)
    p = ModelParams("attraction_repulsion", chi=0.5 / (10 * k * vs), xi=0.5 / (10 * k * ws))
    cfg = default_lyapunov_config(p, 2, vs, ws, k)
    u = ScalarField(g, rng.random(g.n_cells) * 50)
    state = SimState(u, ScalarField(g, rng.random(g.n_cells) * vs),
                     ScalarField(g, rng.random(g.n_cells) * ws), v_sup0=vs, w_sup0=ws)
    e = lyapunov(state, cfg)
    base = lk_norm(u, k) ** k
    assert base * (1 - 1e-12) <= e <= cfg.weight_bound() * base * (1 + 1e-12)


def test_threshold_examples():
    rep = thresholds(3, 20.0, 20.0)
    assert rep.chi_max_theorem == pytest.approx(1 / 300, rel=1e-15)
    assert rep.xi_max_theorem == pytest.approx(1 / 300, rel=1e-15)
    assert f"{rep.chi_max_theorem:.4g}" == "0.003333"
    assert f"{rep.reference_baghaei:.5g}" == "0.055536"
    assert rep.reference_taoboun == pytest.approx(1 / 480)
    assert rep.chi_max_lemma(2.0) == pytest.approx(1 / 400)
    assert thresholds(2, 1.0).chi_interval_attraction_only == pytest.approx(1 / 3, rel=1e-15)
    assert thresholds(2, 1.0).chi_sup_limit_attr_rep == pytest.approx(0.2)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 12), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_threshold_ordering_and_positivity(n, vs, ws):
    rep = thresholds(n, vs, ws)
    assert rep.ordering_holds()
    assert all(v > 0 for v in rep.as_dict().values())


@pytest.mark.parametrize("args", [(0, 1.0), (2, 0.0), (2, 1.0, -1.0)])
def test_threshold_validation(args):
    with pytest.raises(ValueError):
        thresholds(*args)


def small_series():
    g = build_grid(DomainSpec.disk(), 16)
    u = init_field(g, InitialData.gaussian(20, 30))
    v = init_field(g, InitialData.gaussian(1, 10, (0.3, 0.0)))
    w = init_field(g, InitialData.gaussian(1, 10, (-0.3, 0.1)))
    p = ModelParams("attraction_repulsion", chi=1 / 30, xi=1 / 30, dt=1e-4, t_end=2e-3)
    state = SimState(u, v, w)
    return run(state, p, recorder=Recorder.for_run(p, state)).records


def test_csv_round_trip(tmp_path):
    recs = small_series()
    assert not math.isnan(recs[0].lyapunov)
    path = write_series(tmp_path / "s.csv", recs, header_comment="demo")
    lines = path.read_text().splitlines()
    assert lines[0] == "# demo"
    assert lines[1] == ",".join(CSV_COLUMNS)
    back = read_series(path)
    assert back == recs


def test_flags_serialize():
    rec = DiagnosticsRecord(0.5, 1, 0, 2, 0, 1, math.nan, math.nan, 1.5, math.nan,
                            flags=("cfl_clamped", "u_negative"))
    row = rec.csv_row()
    assert row[-1] == "cfl_clamped;u_negative" and len(row) == len(CSV_COLUMNS)
    back = DiagnosticsRecord.from_csv_row(row)
    assert back.flags == rec.flags and back.t == 0.5 and math.isnan(back.max_w)


def test_check_series_passes_and_catches():
    recs = small_series()
    results = {r.name: r for r in check_series(recs)}
    assert set(results) == {"mass", "v_bounds", "w_bounds", "u_nonnegative",
                            "extrema_ordered", "lyapunov_nonincreasing"}
    assert all(r.passed for r in results.values())

    bad = list(recs)
    bad[-1] = DiagnosticsRecord(**{**bad[-1].__dict__, "mass_u": bad[0].mass_u * 1.001,
                                   "min_u": -1e-6, "max_v": bad[0].max_v + 1e-6})
    results = {r.name: r.passed for r in check_series(bad)}
    assert not results["mass"] and not results["u_nonnegative"] and not results["v_bounds"]
    assert [r.name for r in check_series([])] == ["nonempty"]


def test_lyapunov_nonincreasing():
    assert lyapunov_nonincreasing([3, 2, 2, 1]) == (True, 0.0)
    ok, worst = lyapunov_nonincreasing([1.0, 1.0005, 0.9])
    assert ok and worst == pytest.approx(5e-4)
    ok, worst = lyapunov_nonincreasing([1.0, 1.01])
    assert not ok and worst == pytest.approx(0.01)


def test_lk_bounded_by_initial_functional():
    recs = small_series()
    e0 = recs[0].lyapunov
    k = default_k(2)
    assert max(r.lk_u ** k for r in recs) <= e0 * (1 + 1e-3)


def test_recorder_without_config():
    g = build_grid(DomainSpec.disk(), 8)
    u = init_field(g, InitialData.gaussian(20, 30))
    state = SimState(u, u.copy())
    rec = Recorder.for_run(ModelParams("attraction_only", chi=20.0), state)
    assert rec.lyapunov_config is None
    r = rec(state)
    assert math.isnan(r.lyapunov) and math.isnan(r.min_w)
    assert r.mass_u == pytest.approx(mass(u)) and r.lk_u > 0
