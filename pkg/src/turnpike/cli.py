"""Command-line interface.

Subcommands: static, riccati, solve, verify-turnpike, compare, sweep, run.
Problems are ``ex1``, ``ex2``, ``ex1-periodic``, ``ex2-periodic`` or
``lq:<file.json>``.  Failures exit with status 1 and print an error object
as JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from . import __version__
from .analysis import verify_turnpike
from .errors import TurnpikeError
from .io import dumps, read_trajectory, write_trajectory
from .pipeline import METHODS, RunConfig, compare, prepare, run, solve_with, sweep
from .riccati import riccati_report


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def _write_rows(rows: list[dict], path=None) -> None:
    if not rows:
        return
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="", encoding="utf-8")
    try:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})
    finally:
        if fh is not sys.stdout:
            fh.close()


def _add_horizon(sp, steps_default=1000):
    sp.add_argument("--problem", required=True, help="ex1, ex2, ex1-periodic, ex2-periodic or lq:<file>")
    sp.add_argument("--T", type=float, required=True, help="horizon length")
    sp.add_argument("--steps", type=int, default=steps_default, help="number of grid intervals")
    sp.add_argument("--anchor-fraction", type=float, default=0.5, help="middle-point anchor as a fraction of T")
    sp.add_argument("--guess", choices=("static", "zero"), default="static",
                    help="initialization for shoot-classic and direct")
    sp.add_argument("--max-iter", type=int, default=None)


def _config(args, method) -> RunConfig:
    return RunConfig(
        problem=args.problem, method=method, T=args.T, steps=args.steps,
        anchor_fraction=args.anchor_fraction, guess=args.guess, max_iter=args.max_iter,
    )


def cmd_static(args):
    setup = prepare(args.problem)
    out = setup.static.to_dict()
    if args.assumptions:
        out["assumptions"] = setup.assumptions.to_dict()
    _emit(out)


def cmd_riccati(args):
    setup = prepare(args.problem)
    _emit(riccati_report(setup.hamiltonian, setup.lin, setup.split))


def cmd_solve(args):
    cfg = _config(args, args.method).validate()
    setup = prepare(cfg.problem)
    e = solve_with(setup, cfg)
    write_trajectory(e, args.output)
    summary = {"method": cfg.method, "iterations": e.iterations, "boundary_residual": e.boundary_residual}
    if hasattr(e, "summary"):
        summary = {**e.summary(), "method": cfg.method, "boundary_residual": e.boundary_residual}
    text = dumps(summary) + "\n"
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)


def cmd_verify(args):
    setup = prepare(args.problem)
    e = read_trajectory(args.input)
    rep = verify_turnpike(setup.problem, e, setup.static, setup.split, conservative=args.conservative)
    _emit(rep.to_dict(include_profile=args.profile))


def _parse_run(item: str, args) -> RunConfig:
    parts = item.split(":")
    method = parts[0]
    steps = int(parts[1]) if len(parts) > 1 and parts[1] else args.steps
    guess = parts[2] if len(parts) > 2 else "static"
    return RunConfig(problem=args.problem, method=method, T=args.T, steps=steps,
                     anchor_fraction=args.anchor_fraction, guess=guess)


def cmd_compare(args):
    configs = [_parse_run(item, args) for item in args.run]
    _write_rows(compare(configs), args.output)


def cmd_sweep(args):
    horizons = [float(v) for v in args.T.split(",") if v.strip()]
    rows = sweep(args.problem, horizons, args.method, steps_per_unit=args.steps_per_unit, workers=args.workers)
    _write_rows(rows, args.output)


def cmd_run(args):
    cfg = _config(args, args.method)
    cfg.trajectory_path = args.trajectory
    cfg.report_path = args.report
    out = run(cfg)
    if not args.report:
        _emit(out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="turnpike", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("static", help="solve the static problem")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--assumptions", action="store_true", help="include the assumption report")
    sp.set_defaults(func=cmd_static)

    sp = sub.add_parser("riccati", help="Riccati splitting and decay rate C2")
    sp.add_argument("--problem", required=True)
    sp.set_defaults(func=cmd_riccati)

    sp = sub.add_parser("solve", help="solve and write the trajectory CSV")
    _add_horizon(sp)
    sp.add_argument("--method", choices=METHODS, default="shoot-mid")
    sp.add_argument("--output", "-o", default=None, help="trajectory CSV (stdout if omitted)")
    sp.add_argument("--summary", default=None, help="JSON summary file (stderr if omitted)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify-turnpike", help="turnpike report for a trajectory CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--problem", required=True)
    sp.add_argument("--conservative", action="store_true", help="also fit C1 with the halved rate C2/2")
    sp.add_argument("--profile", action="store_true", help="include the deviation profile")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("compare", help="pairwise distances between solver runs (CSV)")
    _add_horizon(sp)
    sp.add_argument("--run", action="append", required=True,
                    help="method[:steps[:guess]], repeat at least twice")
    sp.add_argument("--output", "-o", default=None)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("sweep", help="solve and verify over several horizons (CSV)")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--T", required=True, help="comma-separated horizons")
    sp.add_argument("--method", choices=METHODS, default="shoot-mid")
    sp.add_argument("--steps-per-unit", type=float, default=100.0)
    sp.add_argument("--workers", type=int, default=4)
    sp.add_argument("--output", "-o", default=None)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("run", help="full pipeline with trajectory and report artifacts")
    _add_horizon(sp)
    sp.add_argument("--method", choices=METHODS, default="shoot-mid")
    sp.add_argument("--trajectory", default=None, help="trajectory CSV path")
    sp.add_argument("--report", default=None, help="report JSON path (stdout if omitted)")
    sp.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (TurnpikeError, ValueError, OSError) as exc:
        err = exc.to_dict() if isinstance(exc, TurnpikeError) else {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(dumps(err) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
