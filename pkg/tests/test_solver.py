import dataclasses
import math

import numpy as np
import pytest

from hydromig.assembly import Assembler
from hydromig.scenarios import (BoundaryCondition, InitialZone, Mesh1D, Scenario, Zone,
                                build_case)
from hydromig.solver import GAS_EPS, SolverSettings, detect_events, newton_step, run

# regression value recorded from the first implementation
CASE1_FIRST_STEP_ITERATIONS = 2


def test_case1_first_step_iteration_count_pinned():
    sc = build_case(1)
    asm = Assembler(sc)
    p, r = sc.initial_state()
    res = newton_step(asm, p, r, p, r, sc.dt_init, SolverSettings())
    assert res.converged
    assert res.iterations == CASE1_FIRST_STEP_ITERATIONS


def test_start_at_converged_state():
    sc = build_case(1, 50)
    asm = Assembler(sc)
    p, r = sc.initial_state()
    first = newton_step(asm, p, r, p, r, sc.dt_init, SolverSettings())
    again = newton_step(asm, p, r, first.p, first.r, sc.dt_init, SolverSettings())
    assert again.converged and again.iterations <= 1


def test_failure_leaves_inputs_untouched():
    sc = build_case(4, 60)
    asm = Assembler(sc)
    p, r = sc.initial_state()
    p0, r0 = p.copy(), r.copy()
    res = newton_step(asm, p, r, p, r, 1e5, SolverSettings(max_newton=1))
    assert not res.converged and res.reason
    np.testing.assert_array_equal(p, p0)
    np.testing.assert_array_equal(r, r0)
    np.testing.assert_array_equal(res.p, p0)


def test_non_finite_guess_rejected():
    sc = build_case(1, 20)
    asm = Assembler(sc)
    p, r = sc.initial_state()
    bad = p.copy()
    bad[3] = np.nan
    res = newton_step(asm, p, r, bad, r, sc.dt_init, SolverSettings())
    assert not res.converged and "non-finite" in res.reason


@pytest.mark.parametrize("kwargs", [dict(tol_r_w=0.0), dict(dt_growth=1.0), dict(dt_cut=1.0),
                                    dict(max_newton=0), dict(tol_update=-1.0)])
def test_settings_validation(kwargs):
    with pytest.raises(ValueError):
        SolverSettings(**kwargs)


def _steady(fluid_r=1e-2):
    from hydromig import FluidParams, RockParams
    rock = RockParams(5e-20, 0.15, 2e6, 1.49, 0.4)
    return Scenario(
        name="steady", mesh=Mesh1D(10.0, 20), rocks=(rock,),
        rock_zones=(Zone(-math.inf, math.inf),), fluid=FluidParams(),
        bc_left=BoundaryCondition.neumann("left"),
        bc_right=BoundaryCondition.dirichlet("right", 1e6, fluid_r),
        initial=(InitialZone(-math.inf, math.inf, 1e6, fluid_r),),
        t_end=1e10, dt_init=1e6, dt_min=1e3, dt_max=1e9, snapshot_times=(1e8, 1e10))


def test_steady_state_preserved():
    rep = run(_steady())
    p0, r0 = rep.states[0]
    for p, r in rep.states:
        np.testing.assert_array_equal(p, p0)
        np.testing.assert_array_equal(r, r0)
    ev = rep.events
    assert ev["first_gas_appearance_t"] is None
    assert ev["gas_disappearance_intervals"] == []
    assert ev["p_l_peak_t"] is None
    assert ev["stationarity_t"] is None


def test_time_bookkeeping_and_snapshots():
    sc = build_case(4, 50)
    rep = run(sc)
    t = np.array(rep.times)
    assert np.all(np.diff(t) > 0)
    assert t[-1] == sc.t_end
    assert sorted(rep.snapshots) == list(sc.snapshot_times)
    for ts in sc.snapshot_times:
        assert ts in rep.times


def test_run_is_deterministic():
    a = run(build_case(4, 40))
    b = run(build_case(4, 40))
    assert a.times == b.times
    for (pa, ra), (pb, rb) in zip(a.states, b.states):
        assert np.array_equal(pa, pb) and np.array_equal(ra, rb)
    assert a.events == b.events


def test_ledger_balances_case2():
    rep = run(build_case(2, 40))
    assert not rep.aborted
    last = rep.ledger[-1]
    total = max(abs(last["inflow_h"]), rep.ledger[0]["mass_h"])
    assert abs(last["imbalance_h"]) < 1e-6 * total
    assert abs(last["imbalance_w"]) < 1e-9 * rep.ledger[0]["mass_w"]


def test_abort_reports_partial_history():
    sc = dataclasses.replace(build_case(4, 40), dt_init=1e4, dt_min=5e3, dt_max=1e5)
    rep = run(sc, SolverSettings(max_newton=1, max_dt_cuts=1))
    assert rep.aborted and "step failed" in rep.message
    assert rep.times[0] == 0.0


def _fake_report(max_sg_rows, t):
    from hydromig.solver import SolveReport, StepRecord
    rep = SolveReport(scenario=None)
    for k, sg in enumerate(max_sg_rows):
        sg = np.asarray(sg, dtype=float)
        rep.saturations.append(sg)
        rep.steps.append(StepRecord(t[k], 1.0, 1, float(sg.max()), 1e6 + k, 0.0,
                                    float(10 - k), int(np.sum(sg > GAS_EPS))))
    return rep


def test_event_detection_disappearance_interval():
    rows = [[0, 0], [0.1, 0], [0.1, 0.2], [0, 0.2], [0, 0.1], [0.2, 0.1]]
    rep = _fake_report(rows, np.arange(6.0))
    ev = detect_events(rep, ratio=0.75)
    assert ev["first_gas_appearance_t"] == 1.0
    assert ev["gas_disappearance_intervals"] == [[3.0, 5.0]]
    assert ev["p_l_peak_t"] == 5.0
    # |F_w| falls from 10 to 7 at t=3, the first value below 0.75 * 10
    assert ev["stationarity_t"] == 3.0


def test_open_disappearance_interval():
    rows = [[0.1], [0.0], [0.0]]
    ev = detect_events(_fake_report(rows, np.arange(3.0)))
    assert ev["gas_disappearance_intervals"] == [[1.0, None]]
