"""Snapshot, event and ledger files written by a run.

Snapshots are CSV with one row per cell and values printed with 17
significant digits, so reading them back recovers every float exactly.
Face fluxes are per unit area, positive toward increasing x, and given for
the left and right face of each cell.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .assembly import Assembler
from .fluid import CellState, secondary_state, unilateral_residual
from .scenarios import YEAR, Scenario

SNAPSHOT_COLUMNS = (
    "t_s", "t_yr", "x", "p_l", "rho_l_h", "molar_density", "S_g", "p_g", "rho_tot",
    "F_w_left", "F_h_left", "F_w_right", "F_h_right",
)
LEDGER_COLUMNS = ("t_s", "mass_w", "mass_h", "inflow_w", "inflow_h",
                  "imbalance_w", "imbalance_h")
UNILATERAL_TOL = 1e-10


class OutputError(RuntimeError):
    pass


def snapshot_table(scenario: Scenario, t: float, p, r, asm: Assembler | None = None):
    """Columns of one snapshot as a dict of arrays (see ``SNAPSHOT_COLUMNS``)."""
    asm = asm or Assembler(scenario)
    fl = scenario.fluid
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    n = p.size
    S_g = np.empty(n)
    p_g = np.empty(n)
    rho_tot = np.empty(n)
    for k, rock in enumerate(scenario.rocks):
        sel = scenario.rock_of_cell == k
        if not np.any(sel):
            continue
        state = CellState(p[sel], r[sel])
        sec = secondary_state(state, rock, fl)
        bad = np.abs(np.atleast_1d(unilateral_residual(state, sec, fl))) > UNILATERAL_TOL
        if np.any(bad):
            i = np.flatnonzero(sel)[np.argmax(bad)]
            raise OutputError(f"unilateral condition violated in cell {i} at t={t:g} s")
        S_g[sel], p_g[sel], rho_tot[sel] = sec.S_g, sec.p_g, sec.rho_tot
    fx = asm.fluxes(p, r)
    A = scenario.mesh.cross_section
    cols = {
        "t_s": np.full(n, float(t)),
        "t_yr": np.full(n, float(t) / YEAR),
        "x": scenario.mesh.centers,
        "p_l": p,
        "rho_l_h": r,
        "molar_density": r / fl.M_h,
        "S_g": S_g,
        "p_g": p_g,
        "rho_tot": rho_tot,
        "F_w_left": fx.F_w[:-1] / A,
        "F_h_left": fx.F_h[:-1] / A,
        "F_w_right": fx.F_w[1:] / A,
        "F_h_right": fx.F_h[1:] / A,
    }
    for name, v in cols.items():
        if not np.all(np.isfinite(v)):
            raise OutputError(f"non-finite values in column {name} at t={t:g} s")
    return cols


def _write_csv(path: Path, header, columns):
    data = np.column_stack(columns)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            np.savetxt(fh, data, fmt="%.17g", delimiter=",")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc


def write_snapshot(path, table: dict):
    _write_csv(Path(path), SNAPSHOT_COLUMNS, [table[c] for c in SNAPSHOT_COLUMNS])


def read_csv(path):
    """Read a file written by this module into a dict of float arrays."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def _time(t):
    return None if t is None else {"s": t, "yr": t / YEAR}


def events_document(report) -> dict:
    ev = report.events
    intervals = []
    for start, end in ev.get("gas_disappearance_intervals", []):
        intervals.append({"start": _time(start), "end": _time(end)})
    return {
        "scenario": report.scenario.name,
        "first_gas_appearance_t": _time(ev.get("first_gas_appearance_t")),
        "gas_disappearance_intervals": intervals,
        "p_l_peak_t": _time(ev.get("p_l_peak_t")),
        "stationarity_t": _time(ev.get("stationarity_t")),
        "aborted": report.aborted,
        "message": report.message,
    }


def write_events(path, report):
    path = Path(path)
    try:
        path.write_text(json.dumps(events_document(report), indent=2) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc


def write_ledger(path, report):
    rows = report.ledger
    cols = [np.array([row["t"] for row in rows])]
    cols += [np.array([row[k] for row in rows]) for k in LEDGER_COLUMNS[1:]]
    _write_csv(Path(path), LEDGER_COLUMNS, cols)


def write_run(out_dir, report) -> list[Path]:
    """Write snapshots/, events.json and mass_ledger.csv under ``out_dir``."""
    out = Path(out_dir)
    snap_dir = out / "snapshots"
    try:
        snap_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {snap_dir}: {exc.strerror}") from exc
    sc = report.scenario
    asm = Assembler(sc)
    written = []
    for k, (t, (p, r)) in enumerate(sorted(report.snapshots.items())):
        path = snap_dir / f"snapshot_{k:03d}.csv"
        write_snapshot(path, snapshot_table(sc, t, p, r, asm))
        written.append(path)
    write_events(out / "events.json", report)
    write_ledger(out / "mass_ledger.csv", report)
    return written + [out / "events.json", out / "mass_ledger.csv"]
