"""Damped Newton per implicit step, adaptive time stepping, event tracking."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .assembly import BAND, Assembler, pack
from .scenarios import Scenario

log = logging.getLogger(__name__)

GAS_EPS = 1e-8  # a cell "has gas" when S_g exceeds this
BACKTRACK = (1.0, 0.5, 0.25, 0.125)


@dataclass(frozen=True)
class SolverSettings:
    """Newton and time-step controls.

    Residual tolerances apply to the scaled residuals (mass imbalance over a
    step divided by the cell pore volume times a reference density, i.e.
    saturation-like units); ``tol_update`` bounds the scaled Newton update.
    """

    tol_r_w: float = 1e-9
    tol_r_h: float = 1e-9
    tol_update: float = 1e-7
    max_newton: int = 30
    dt_growth: float = 1.3
    dt_cut: float = 0.5
    max_dt_cuts: int = 25
    growth_iter_limit: int = 6
    stationarity_ratio: float = 1e-3

    def __post_init__(self):
        if min(self.tol_r_w, self.tol_r_h, self.tol_update) <= 0:
            raise ValueError("tolerances must be positive")
        if not self.dt_growth > 1.0 > self.dt_cut > 0.0:
            raise ValueError("need dt_growth > 1 > dt_cut > 0")
        if self.max_newton < 1 or self.max_dt_cuts < 1:
            raise ValueError("iteration caps must be positive")


@dataclass
class NewtonResult:
    converged: bool
    p: np.ndarray
    r: np.ndarray
    iterations: int
    clipped: bool = False
    reason: str = ""


def newton_step(asm: Assembler, p_old, r_old, p_guess, r_guess, dt,
                settings: SolverSettings) -> NewtonResult:
    """Solve one implicit Euler step. Inputs are never modified."""
    acc_old = asm.old_accumulation(p_old, r_old)
    x = asm.to_scaled(p_guess, r_guess)
    if not np.all(np.isfinite(x)):
        return NewtonResult(False, p_old, r_old, 0, reason="non-finite guess")
    p, r = asm.from_scaled(x)
    R = asm.scaled_residual(p_old, r_old, p, r, dt, acc_old)
    clipped = False

    def small(R):
        return (np.max(np.abs(R[0::2])) < settings.tol_r_w
                and np.max(np.abs(R[1::2])) < settings.tol_r_h)

    if small(R):
        return NewtonResult(True, p, r, 0)
    norm = np.linalg.norm(R)
    for it in range(1, settings.max_newton + 1):
        ab = asm.jacobian(p_old, r_old, p, r, dt, acc_old, base=R)
        try:
            dx = solve_banded((BAND, BAND), ab, -R)
        except (np.linalg.LinAlgError, ValueError) as exc:
            return NewtonResult(False, p_old, r_old, it, reason=f"linear solve: {exc}")
        if not np.all(np.isfinite(dx)):
            return NewtonResult(False, p_old, r_old, it, reason="non-finite update")
        for alpha in BACKTRACK:
            x_try = x + alpha * dx
            neg = x_try[1::2] < 0.0
            if np.any(neg):
                x_try[1::2][neg] = 0.0
            p_try, r_try = asm.from_scaled(x_try)
            R_try = asm.scaled_residual(p_old, r_old, p_try, r_try, dt, acc_old)
            norm_try = np.linalg.norm(R_try)
            if np.isfinite(norm_try) and norm_try < norm:
                break
        else:
            return NewtonResult(False, p_old, r_old, it, reason="line search failed")
        clipped |= bool(np.any(neg))
        update = np.max(np.abs(x_try - x))
        x, p, r, R, norm = x_try, p_try, r_try, R_try, norm_try
        if small(R) and update < settings.tol_update:
            return NewtonResult(True, p, r, it, clipped)
    return NewtonResult(False, p_old, r_old, settings.max_newton, reason="max iterations")


@dataclass
class StepRecord:
    t: float
    dt: float
    newton: int
    max_S_g: float
    max_p_l: float
    max_abs_q_l: float
    max_abs_F_w: float
    gas_cells: int


@dataclass
class SolveReport:
    """Accepted history, snapshots, events and the mass ledger of a run."""

    scenario: Scenario
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)  # (p_l, rho_l_h) per accepted time
    steps: list = field(default_factory=list)  # StepRecord per accepted step
    saturations: list = field(default_factory=list)  # S_g per accepted time
    snapshots: dict = field(default_factory=dict)  # t -> (p_l, rho_l_h)
    ledger: list = field(default_factory=list)  # dict rows
    events: dict = field(default_factory=dict)
    aborted: bool = False
    message: str = ""

    @property
    def final_state(self):
        return self.states[-1]


def _record(asm: Assembler, report: SolveReport, t, dt, newton, p, r, inflow):
    cf = asm.cell_fields(p, r)
    fx = asm.fluxes(p, r, cf)
    A = asm.area
    report.times.append(t)
    report.states.append((p.copy(), r.copy()))
    report.saturations.append(cf.S_g.copy())
    report.steps.append(StepRecord(
        t=t, dt=dt, newton=newton,
        max_S_g=float(np.max(cf.S_g)),
        max_p_l=float(np.max(p)),
        max_abs_q_l=float(np.max(np.abs(fx.q_l))) / A,
        max_abs_F_w=float(np.max(np.abs(fx.F_w))) / A,
        gas_cells=int(np.count_nonzero(cf.S_g > GAS_EPS)),
    ))
    m_w, m_h = asm.masses(p, r)
    led0 = report.ledger[0] if report.ledger else None
    row = {
        "t": t,
        "mass_w": m_w,
        "mass_h": m_h,
        "inflow_w": inflow[0],
        "inflow_h": inflow[1],
    }
    if led0 is None:
        row["imbalance_w"] = 0.0
        row["imbalance_h"] = 0.0
    else:
        row["imbalance_w"] = m_w - led0["mass_w"] - inflow[0]
        row["imbalance_h"] = m_h - led0["mass_h"] - inflow[1]
    report.ledger.append(row)
    return fx


def detect_events(report: SolveReport, ratio: float = 1e-3) -> dict:
    """Event times from the accepted history (seconds; None when absent)."""
    steps = report.steps
    t = np.array([s.t for s in steps])
    max_sg = np.array([s.max_S_g for s in steps])
    events = {
        "first_gas_appearance_t": None,
        "gas_disappearance_intervals": [],
        "p_l_peak_t": None,
        "stationarity_t": None,
    }
    has_gas = max_sg > GAS_EPS
    if np.any(has_gas):
        events["first_gas_appearance_t"] = float(t[np.argmax(has_gas)])
    # intervals during which some cell has lost the gas it once had
    if report.saturations:
        seen = np.zeros_like(report.saturations[0], dtype=bool)
        open_start = None
        for k, sg in enumerate(report.saturations):
            gas = sg > GAS_EPS
            lost = np.any(seen & ~gas)
            if lost and open_start is None:
                open_start = float(t[k])
            elif not lost and open_start is not None:
                events["gas_disappearance_intervals"].append([open_start, float(t[k])])
                open_start = None
            seen |= gas
        if open_start is not None:
            events["gas_disappearance_intervals"].append([open_start, None])
    max_p = np.array([s.max_p_l for s in steps])
    if len(steps) > 1 and np.ptp(max_p) > 0:
        events["p_l_peak_t"] = float(t[np.argmax(max_p)])
    fw = np.array([s.max_abs_F_w for s in steps])
    if len(fw) and fw.max() > 0:
        k0 = int(np.argmax(fw))
        below = np.nonzero(fw[k0:] < ratio * fw[k0])[0]
        if below.size:
            events["stationarity_t"] = float(t[k0 + below[0]])
    return events


def run(scenario: Scenario, settings: SolverSettings | None = None,
        keep_states: bool = True) -> SolveReport:
    """Advance ``scenario`` from 0 to ``t_end`` with adaptive implicit Euler."""
    settings = settings or SolverSettings()
    asm = Assembler(scenario)
    report = SolveReport(scenario)
    p, r = scenario.initial_state()
    t = 0.0
    inflow = [0.0, 0.0]
    _record(asm, report, t, 0.0, 0, p, r, inflow)
    snaps = list(scenario.snapshot_times)
    dt = scenario.dt_init
    cuts = 0
    t_end = scenario.t_end
    while t < t_end * (1 - 1e-14):
        target = t_end
        if snaps:
            target = min(target, snaps[0])
        step = min(dt, target - t)
        # avoid leaving a sliver before the target
        if target - t - step < 1e-3 * step:
            step = target - t
        res = newton_step(asm, p, r, p, r, step, settings)
        if not res.converged:
            cuts += 1
            dt = step * settings.dt_cut
            log.debug("t=%.6g dt=%.4g rejected (%s)", t, step, res.reason)
            if cuts > settings.max_dt_cuts or dt < scenario.dt_min:
                report.aborted = True
                report.message = f"step failed at t={t:.6g} s: {res.reason}"
                log.error(report.message)
                break
            continue
        cuts = 0
        p, r = res.p, res.r
        # boundary inflow over the step, evaluated at the new state (implicit)
        fx = asm.fluxes(p, r)
        inflow[0] += step * (fx.F_w[0] - fx.F_w[-1])
        inflow[1] += step * (fx.F_h[0] - fx.F_h[-1])
        hit_target = abs((t + step) - target) <= 1e-12 * max(1.0, target)
        t = target if hit_target else t + step
        _record(asm, report, t, step, res.iterations, p, r, inflow)
        if snaps and abs(t - snaps[0]) <= 1e-12 * max(1.0, snaps[0]):
            report.snapshots[snaps.pop(0)] = (p.copy(), r.copy())
        log.info("t=%.6g dt=%.4g newton=%d", t, step, res.iterations)
        if res.iterations <= settings.growth_iter_limit and step >= dt * (1 - 1e-12):
            dt = min(dt * settings.dt_growth, scenario.dt_max)
        elif res.iterations <= settings.growth_iter_limit:
            dt = max(dt, step)
    report.events = detect_events(report, settings.stationarity_ratio)
    if not keep_states:
        report.states = [report.states[0], report.states[-1]]
    return report


def march(scenario: Scenario, dt: float, n_steps: int,
          settings: SolverSettings | None = None, state=None):
    """Fixed-step implicit Euler; returns the final (p_l, rho_l_h)."""
    settings = settings or SolverSettings()
    asm = Assembler(scenario)
    p, r = scenario.initial_state() if state is None else state
    for k in range(n_steps):
        res = newton_step(asm, p, r, p, r, dt, settings)
        if not res.converged:
            raise RuntimeError(f"fixed step {k} failed: {res.reason}")
        p, r = res.p, res.r
    return p, r


def state_vector(p, r):
    return pack(p, r)
