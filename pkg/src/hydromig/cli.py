"""Command line entry point.

Exit codes: 0 success, 1 run aborted or a verification check failed,
2 bad usage or input (unknown case, malformed config, unwritable output).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from . import kernels
from .config import ConfigError, load_config
from .output import OutputError, write_run
from .scenarios import Mesh1D, build_case
from .solver import run
from .verify import SUITES, run_suite

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
log = logging.getLogger("hydromig")


class UsageError(Exception):
    pass


def _setup_logging():
    name = os.environ.get("HYDROMIG_LOG", "error").strip().lower()
    if name not in LOG_LEVELS:
        raise UsageError(f"HYDROMIG_LOG must be one of {', '.join(LOG_LEVELS)}, got {name!r}")
    logging.basicConfig(level=LOG_LEVELS[name], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _times(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty snapshot list")
    return vals


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hydromig",
                                 description="Water-hydrogen migration in porous media.")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a benchmark case")
    sim.add_argument("--case", type=int, choices=(1, 2, 3, 4), required=True)
    sim.add_argument("--cells", type=int, help="number of uniform cells")
    sim.add_argument("--config", type=Path, help="scenario file replacing the built-in case")
    sim.add_argument("--snapshots", type=_times,
                     help="comma-separated output times in the case's time unit "
                          "(years for cases 1-3, seconds for case 4)")
    sim.add_argument("--out", type=Path, help="output directory (default out/case<N>)")
    sim.add_argument("--gravity", type=float, metavar="GX",
                     help="gravity component along x [m/s^2]")

    ver = sub.add_parser("verify", help="run a property suite")
    ver.add_argument("--suite", choices=tuple(SUITES), required=True)
    return ap


def _scenario(args):
    if args.config is not None:
        try:
            sc = load_config(args.config)
        except ConfigError as exc:
            raise UsageError(str(exc))
    else:
        sc = build_case(args.case)
    try:
        if args.cells is not None:
            if args.cells < 10:
                raise UsageError("--cells must be at least 10")
            sc = dataclasses.replace(sc, mesh=Mesh1D(sc.mesh.length, args.cells,
                                                     sc.mesh.cross_section))
        if args.snapshots is not None:
            times = tuple(sorted(t * sc.time_unit for t in args.snapshots))
            sc = dataclasses.replace(sc, snapshot_times=times)
        if args.gravity is not None:
            sc = dataclasses.replace(sc, gravity=args.gravity)
    except ValueError as exc:
        raise UsageError(str(exc))
    return sc


def _simulate(args) -> int:
    sc = _scenario(args)
    out = args.out if args.out is not None else Path("out") / f"case{args.case}"
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror}")
    log.info("running %s on %d cells (%s kernels)", sc.name, sc.mesh.n_cells, kernels.BACKEND)
    report = run(sc, keep_states=False)
    try:
        paths = write_run(out, report)
    except OutputError as exc:
        raise UsageError(str(exc))
    print(f"wrote {len(paths)} files to {out}")
    if report.aborted:
        print(f"run aborted: {report.message}", file=sys.stderr)
        return 1
    return 0


def _verify(args) -> int:
    results = run_suite(args.suite)
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        _setup_logging()
        if args.command == "simulate":
            return _simulate(args)
        return _verify(args)
    except UsageError as exc:
        print(f"hydromig: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
