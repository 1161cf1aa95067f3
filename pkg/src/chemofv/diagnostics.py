"""Conserved quantities, bounds, the weighted L^k functional and parameter thresholds."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .fields import EPS_NN, ScalarField, SimState, field_extrema

if TYPE_CHECKING:
    from .stepper import ModelParams

# exp() arguments above this mean beta^2 / gamma^2 were misconfigured
MAX_EXPONENT = 700.0
SHRINK = 0.99

CSV_COLUMNS = ("t", "mass_u", "min_u", "max_u", "min_v", "max_v",
               "min_w", "max_w", "lk_u", "lyapunov", "flags")


def mass(f: ScalarField) -> float:
    return float(f.values.sum() * f.grid.cell_volume)


def lk_integral(f: ScalarField, k: float) -> float:
    """sum_c V_c f_c^k; raises if f dips below -EPS_NN."""
    if k < 1:
        raise ValueError("k must be >= 1")
    vals = f.values
    if vals.size and vals.min() < -EPS_NN:
        raise ValueError(f"L^k norm of a field with negative values (min {vals.min():.3e})")
    return float(np.sum(np.maximum(vals, 0.0) ** k) * f.grid.cell_volume)


def lk_norm(f: ScalarField, k: float) -> float:
    return lk_integral(f, k) ** (1.0 / k)


def default_k(n: int) -> float:
    return n / 2 + 0.5


@dataclass(frozen=True)
class LyapunovConfig:
    """Exponent and weights of int u^k exp(beta^2 v^2 + gamma^2 w^2).

    ``eps*_sq`` are the squared Young parameters; ``beta_sq``/``gamma_sq``
    follow from eps1/eps3 and the initial chemical maxima.  A ``gamma_sq``
    of zero drops the repellent from the weight (attraction-only model).
    """

    k: float
    chi: float
    xi: float
    eps1_sq: float
    eps2_sq: float
    eps3_sq: float
    eps4_sq: float
    beta_sq: float
    gamma_sq: float
    v_sup0: float
    w_sup0: float

    def e_set_margin(self) -> float:
        """(k-1) minus the left side of the admissibility inequality; > 0 inside the set."""
        used = (self.eps1_sq + self.chi * (self.k - 1) * self.eps2_sq / 2
                + self.eps3_sq + self.xi * (self.k - 1) * self.eps4_sq / 2)
        return (self.k - 1) - used

    def weight_bound(self) -> float:
        """Upper bound b of the weight given 0 <= v <= v_sup0, 0 <= w <= w_sup0."""
        w_part = self.gamma_sq * self.w_sup0**2 if self.gamma_sq else 0.0
        return math.exp(self.beta_sq * self.v_sup0**2 + w_part)


def default_lyapunov_config(params: "ModelParams", n: int, v_sup0: float,
                            w_sup0: float | None, k: float | None = None) -> LyapunovConfig:
    """Pick Young parameters 1% inside the admissible set.

    Requires 0 < chi < 1/(10 k v_sup0) and, with repulsion, the same for
    xi against w_sup0.
    """
    k = default_k(n) if k is None else float(k)
    if not k > 1:
        raise ValueError("k must exceed 1")
    chi = params.chi
    repulsion = params.variant == "attraction_repulsion"
    chi_max = 1.0 / (10 * k * v_sup0)
    if not 0 < chi < chi_max:
        raise ValueError(
            f"chi={chi:g} outside (0, 1/(10 k v_sup0)) = (0, {chi_max:.6g}) for k={k:g}"
        )
    eps1_sq = SHRINK * (k - 1) / 4
    eps2_sq = SHRINK / (2 * chi)
    beta_sq = eps1_sq / (10 * k * v_sup0**2)
    if repulsion:
        xi = params.xi
        if w_sup0 is None or not w_sup0 > 0:
            raise ValueError("repulsive weight needs a positive w_sup0")
        xi_max = 1.0 / (10 * k * w_sup0)
        if not 0 < xi < xi_max:
            raise ValueError(
                f"xi={xi:g} outside (0, 1/(10 k w_sup0)) = (0, {xi_max:.6g}) for k={k:g}"
            )
        eps3_sq = eps1_sq
        eps4_sq = SHRINK / (2 * xi)
        gamma_sq = eps3_sq / (10 * k * w_sup0**2)
    else:
        xi, eps3_sq, eps4_sq, gamma_sq = 0.0, 0.0, 0.0, 0.0
        w_sup0 = 0.0 if w_sup0 is None else w_sup0
    cfg = LyapunovConfig(k, chi, xi, eps1_sq, eps2_sq, eps3_sq, eps4_sq,
                         beta_sq, gamma_sq, v_sup0, w_sup0)
    if not cfg.e_set_margin() > 0:
        raise AssertionError("Young parameters fell outside the admissible set")
    return cfg


def lyapunov(state: SimState, cfg: LyapunovConfig) -> float:
    """sum_c V_c u_c^k exp(beta^2 v_c^2 + gamma^2 w_c^2)."""
    arg = cfg.beta_sq * state.v.values**2
    if state.w is not None and cfg.gamma_sq:
        arg = arg + cfg.gamma_sq * state.w.values**2
    top = float(arg.max())
    if top > MAX_EXPONENT:
        raise OverflowError(f"weight exponent {top:g} exceeds {MAX_EXPONENT}; check beta^2/gamma^2")
    u = np.maximum(state.u.values, 0.0)
    return float(np.sum(u**cfg.k * np.exp(arg)) * state.grid.cell_volume)


@dataclass(frozen=True)
class ThresholdReport:
    n: int
    v_sup0: float
    w_sup0: float
    chi_max_theorem: float
    xi_max_theorem: float
    chi_interval_attraction_only: float
    chi_sup_limit_attr_rep: float
    reference_taoboun: float
    reference_baghaei: float

    def chi_max_lemma(self, k: float) -> float:
        return 1.0 / (10 * k * self.v_sup0)

    def xi_max_lemma(self, k: float) -> float:
        return 1.0 / (10 * k * self.w_sup0)

    def ordering_holds(self) -> bool:
        return (self.chi_max_theorem < self.chi_sup_limit_attr_rep
                < self.chi_interval_attraction_only)

    def as_dict(self, k: float | None = None) -> dict[str, float]:
        k = default_k(self.n) if k is None else k
        return {
            "n": self.n,
            "v_sup0": self.v_sup0,
            "w_sup0": self.w_sup0,
            "chi_max_theorem": self.chi_max_theorem,
            "xi_max_theorem": self.xi_max_theorem,
            "k": k,
            "chi_max_lemma": self.chi_max_lemma(k),
            "xi_max_lemma": self.xi_max_lemma(k),
            "chi_interval_attraction_only": self.chi_interval_attraction_only,
            "chi_sup_limit_attr_rep": self.chi_sup_limit_attr_rep,
            "reference_taoboun": self.reference_taoboun,
            "reference_baghaei": self.reference_baghaei,
        }


def thresholds(n: int, v_sup0: float, w_sup0: float | None = None) -> ThresholdReport:
    if n < 1 or v_sup0 <= 0:
        raise ValueError("n and v_sup0 must be positive")
    w_sup0 = v_sup0 if w_sup0 is None else w_sup0
    if w_sup0 <= 0:
        raise ValueError("w_sup0 must be positive")
    return ThresholdReport(
        n=n,
        v_sup0=v_sup0,
        w_sup0=w_sup0,
        chi_max_theorem=1.0 / (5 * n * v_sup0),
        xi_max_theorem=1.0 / (5 * n * w_sup0),
        chi_interval_attraction_only=2.0 / (3 * n * v_sup0),
        chi_sup_limit_attr_rep=2.0 / (5 * n * v_sup0),
        reference_taoboun=1.0 / (6 * (n + 1) * v_sup0),
        reference_baghaei=math.pi / (v_sup0 * math.sqrt(2 * (n + 1))),
    )


@dataclass
class DiagnosticsRecord:
    t: float
    mass_u: float
    min_u: float
    max_u: float
    min_v: float
    max_v: float
    min_w: float
    max_w: float
    lk_u: float
    lyapunov: float
    flags: tuple[str, ...] = ()
    step: int = field(default=0, compare=False)

    def csv_row(self) -> list[str]:
        nums = [self.t, self.mass_u, self.min_u, self.max_u, self.min_v, self.max_v,
                self.min_w, self.max_w, self.lk_u, self.lyapunov]
        return [f"{x:.17g}" for x in nums] + [";".join(self.flags)]

    @classmethod
    def from_csv_row(cls, row: Sequence[str]) -> "DiagnosticsRecord":
        nums = [float(x) for x in row[:10]]
        flags = tuple(f for f in row[10].split(";") if f) if len(row) > 10 else ()
        return cls(*nums, flags=flags)


class Recorder:
    """Turns a state into a :class:`DiagnosticsRecord`.

    The Lyapunov column is NaN unless a config is supplied (the weighted
    functional is only meaningful inside the admissible parameter range).
    """

    def __init__(self, k: float, lyapunov_config: LyapunovConfig | None = None):
        self.k = k
        self.lyapunov_config = lyapunov_config

    @classmethod
    def for_run(cls, params: "ModelParams", state: SimState, k: float | None = None) -> "Recorder":
        k = default_k(state.grid.dimension) if k is None else k
        w_sup0 = state.w_sup0 if state.w is not None else None
        try:
            cfg = default_lyapunov_config(params, state.grid.dimension, state.v_sup0, w_sup0, k)
        except ValueError:
            cfg = None
        return cls(k, cfg)

    def __call__(self, state: SimState, flags: Iterable[str] = ()) -> DiagnosticsRecord:
        umin, umax = field_extrema(state.u)
        vmin, vmax = field_extrema(state.v)
        wmin, wmax = field_extrema(state.w) if state.w is not None else (math.nan, math.nan)
        try:
            lk = lk_norm(state.u, self.k)
        except ValueError:
            lk = math.nan
        lyap = lyapunov(state, self.lyapunov_config) if self.lyapunov_config else math.nan
        return DiagnosticsRecord(state.t, mass(state.u), umin, umax, vmin, vmax, wmin, wmax,
                                 lk, lyap, tuple(flags), step=state.step)


def write_series(path: str | Path, records: Sequence[DiagnosticsRecord],
                 header_comment: str | None = None) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.csv_row())
    return path


def read_series(path: str | Path) -> list[DiagnosticsRecord]:
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {header}")
    return [DiagnosticsRecord.from_csv_row(row) for row in reader if row]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def check_series(records: Sequence[DiagnosticsRecord], mass_rtol: float = 1e-8,
                 sup_atol: float = 1e-9, nonneg_atol: float = EPS_NN,
                 lyapunov_rtol: float = 1e-3) -> list[CheckResult]:
    """Re-validate the theory-backed invariants of a recorded series.

    Lyapunov monotonicity is reported but never counted as a hard failure
    by callers that only look at ``mass``/``bounds``/``positivity``.
    """
    if not records:
        return [CheckResult("nonempty", False, "series has no rows")]
    first = records[0]
    m0 = first.mass_u
    drift = max(abs(r.mass_u - m0) for r in records) / m0 if m0 > 0 else 0.0
    out = [CheckResult("mass", drift <= mass_rtol, f"max relative drift {drift:.3e}")]

    v0, w0 = first.max_v, first.max_w
    v_ok = all(r.max_v <= v0 + sup_atol and r.min_v >= -nonneg_atol for r in records)
    out.append(CheckResult("v_bounds", v_ok, f"max_v0={v0:.6g}"))
    if not math.isnan(w0):
        w_ok = all(r.max_w <= w0 + sup_atol and r.min_w >= -nonneg_atol for r in records)
        out.append(CheckResult("w_bounds", w_ok, f"max_w0={w0:.6g}"))
    umin = min(r.min_u for r in records)
    out.append(CheckResult("u_nonnegative", umin >= -nonneg_atol, f"min_u={umin:.3e}"))
    out.append(CheckResult("extrema_ordered",
                           all(r.min_u <= r.max_u and r.min_v <= r.max_v for r in records)))

    lyap = np.array([r.lyapunov for r in records])
    if not np.isnan(lyap).any():
        ok, worst = lyapunov_nonincreasing(lyap, lyapunov_rtol)
        out.append(CheckResult("lyapunov_nonincreasing", ok, f"worst relative rise {worst:.3e}"))
    return out


def lyapunov_nonincreasing(series: Sequence[float], rtol: float = 1e-3) -> tuple[bool, float]:
    """Per-step check E[i+1] <= E[i] (1 + rtol); returns (ok, worst relative increase)."""
    e = np.asarray(series, dtype=float)
    if e.size < 2:
        return True, 0.0
    rise = (e[1:] - e[:-1]) / np.abs(e[:-1])
    worst = float(rise.max())
    return worst <= rtol, worst
