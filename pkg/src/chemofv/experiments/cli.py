"""Command line entry point.

Exit codes: 0 success, 2 validation error, 3 invariant violation, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from ..diagnostics import check_series, default_k, read_series, thresholds
from ..geometry import ConfigurationError
from ..linsolve import SolverError
from ..stepper import InvariantViolation, StepError
from .presets import PRESETS, SWEEP_PRESETS
from .runner import run_scenario, run_sweep
from .scenario import load_scenario, load_sweep

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INVARIANT = 3
EXIT_SOLVER = 4

# checks whose failure means a theorem-backed invariant was broken
HARD_CHECKS = {"mass", "v_bounds", "w_bounds", "u_nonnegative", "extrema_ordered", "nonempty"}


def _cmd_run(args) -> int:
    s = load_scenario(args.scenario)
    overrides = {}
    if args.cells is not None:
        overrides["cells_per_axis"] = args.cells
    if args.t_end is not None:
        overrides["t_end"] = args.t_end
    if args.dt is not None:
        overrides["dt"] = args.dt
    if overrides:
        s = s.with_overrides(**overrides)
    t0 = time.perf_counter()
    summary = run_scenario(s, args.out)
    print(f"{s.name}: {summary.n_steps} steps ({summary.n_clamped} CFL-clamped) "
          f"in {time.perf_counter() - t0:.1f}s")
    print(f"peak max u = {summary.peak_max_u:.6g} at t = {summary.peak_time:.6g}")
    print(f"outputs: {summary.outputs['series']}, {summary.outputs['summary']}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = load_sweep(args.sweep)
    if args.workers is not None:
        from dataclasses import replace
        spec = replace(spec, workers=args.workers)
    result = run_sweep(spec, args.out)
    for m in result.members:
        s = m.summary
        peak = "" if s is None else f"peak {s.peak_max_u:.6g} at t={s.peak_time:.6g}"
        print(f"xi={m.value:g}: {m.status} {peak}")
    print(f"table: {result.table_path}")
    return EXIT_OK if all(m.status == "ok" for m in result.members) else EXIT_INVARIANT


def _cmd_thresholds(args) -> int:
    rep = thresholds(args.n, args.vsup, args.wsup)
    k = args.k if args.k is not None else default_k(args.n)
    for key, val in rep.as_dict(k).items():
        print(f"{key:<30} {val:.6g}")
    print(f"{'ordering_holds':<30} {rep.ordering_holds()}")
    return EXIT_OK


def _cmd_check(args) -> int:
    records = read_series(args.csv)
    results = check_series(records, mass_rtol=args.mass_rtol)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} {r.detail}")
    hard_fail = any(not r.passed for r in results if r.name in HARD_CHECKS)
    return EXIT_INVARIANT if hard_fail else EXIT_OK


def _cmd_presets(args) -> int:
    if args.show:
        doc = PRESETS.get(args.show) or SWEEP_PRESETS.get(args.show)
        if doc is None:
            raise ConfigurationError(f"unknown preset {args.show!r}")
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    for name, doc in PRESETS.items():
        print(f"{name:<14} scenario  {doc.get('description', '')}")
    for name, doc in SWEEP_PRESETS.items():
        print(f"{name:<14} sweep     {doc.get('description', '')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chemofv", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file or preset")
    p.add_argument("scenario")
    p.add_argument("--out", help="output directory (default: from the scenario)")
    p.add_argument("--cells", type=int, help="override cells_per_axis")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--dt", type=float)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a xi sweep file or preset")
    p.add_argument("sweep")
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("thresholds", help="admissible chi / xi limits")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--vsup", type=float, required=True)
    p.add_argument("--wsup", type=float)
    p.add_argument("--k", type=float)
    p.set_defaults(func=_cmd_thresholds)

    p = sub.add_parser("check", help="re-validate invariants of a series.csv")
    p.add_argument("csv")
    p.add_argument("--mass-rtol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("presets", help="list built-in presets")
    p.add_argument("--show", metavar="NAME", help="print a preset as JSON")
    p.set_defaults(func=_cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (StepError, SolverError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
