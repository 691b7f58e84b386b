"""Property suites run by ``hydromig verify``.

Each check returns a :class:`CheckResult` carrying the measured worst-case
value and the tolerance it is compared against. The reduced saturated
assembly below is written from the single-phase equations directly and
shares no code with :mod:`hydromig.assembly`.
"""
from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .assembly import Assembler, banded_to_dense
from .coefficients import (coeffs_pr, coeffs_total, fluxes_pr, fluxes_total,
                           quadratic_form_check)
from .constitutive import RockParams, dpc_dSg, pc
from .fluid import (CellState, FluidParams, capillary_inverse, saturation_from_state,
                    secondary_state, unilateral_residual)
from .scenarios import (BoundaryCondition, InitialZone, Mesh1D, Scenario, Zone,
                        benchmark_rocks, build_case)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{tag}  {self.name}: {self.value:.3e} (tol {self.tol:.1e}){extra}"


def _result(name, value, tol, detail="", strict_less=True):
    ok = bool(value < tol) if strict_less else bool(value <= tol)
    return CheckResult(name, ok, float(value), float(tol), detail)


# -- phase ----------------------------------------------------------------

def check_capillary_roundtrip(n_samples=1000, seed=0, tol=1e-10) -> CheckResult:
    """p_c^{-1}(p_c(S_g)) = S_g for sampled S_g on every benchmark rock."""
    rng = np.random.default_rng(seed)
    worst, where = 0.0, ""
    for rock in benchmark_rocks():
        S = rng.uniform(0.0, rock.S_g_max, n_samples)
        err = np.abs(capillary_inverse(pc(S, rock), rock) - S)
        if err.max() > worst:
            worst, where = float(err.max()), rock.name
    return _result("capillary inverse round-trip", worst, tol, f"worst rock {where}")


def check_saturation_monotone(n_samples=400, seed=1) -> CheckResult:
    """S_g nondecreasing in rho_l^h and nonincreasing in p_l."""
    rng = np.random.default_rng(seed)
    fl = FluidParams()
    worst = 0.0
    for rock in benchmark_rocks():
        p = rng.uniform(1e5, 5e6, n_samples)
        r = np.sort(fl.C_h * rng.uniform(0.0, 3e7, n_samples))
        S_r = np.asarray(saturation_from_state(CellState(np.full_like(r, 1e6), r), rock, fl))
        ps = np.sort(p)
        S_p = np.asarray(saturation_from_state(CellState(ps, np.full_like(ps, fl.C_h * 3e6)),
                                               rock, fl))
        worst = max(worst, float(np.max(-np.diff(S_r), initial=0.0)),
                    float(np.max(np.diff(S_p), initial=0.0)))
    return _result("saturation monotonicity", worst, 0.0, "largest wrong-way step",
                   strict_less=False)


def check_unilateral(n_samples=1000, seed=2, tol=1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    fl = FluidParams()
    worst = 0.0
    for rock in benchmark_rocks():
        p = rng.uniform(1e5, 5e6, n_samples)
        pi = rng.uniform(-2e6, 2e7, n_samples)
        r = np.maximum(fl.C_h * (p + pi), 0.0)
        st = CellState(p, r)
        sec = secondary_state(st, rock, fl)
        worst = max(worst, float(np.max(np.abs(unilateral_residual(st, sec, fl)))))
    return _result("unilateral condition", worst, tol)


def check_phase_threshold_continuity(tol=1e-6) -> CheckResult:
    """S_g, p_g and rho_tot have no jump across the threshold line."""
    fl = FluidParams()
    worst = 0.0
    for rock in benchmark_rocks():
        for p in (5e5, 1e6, 4e6):
            thr = fl.C_h * p
            r = thr * (1.0 + np.array([-1e-12, 0.0, 1e-12]))
            sec = secondary_state(CellState(np.full(3, p), r), rock, fl)
            worst = max(worst,
                        float(np.ptp(sec.S_g)),
                        float(np.ptp(sec.p_g)) / p,
                        float(np.ptp(sec.rho_tot)) / thr)
    return _result("phase map continuity at threshold", worst, tol)


# -- coefficients ---------------------------------------------------------

def coefficient_jumps(rock: RockParams, fluid: FluidParams, p_l=1e6, half_width=50,
                      spacing=1e-6):
    """Largest relative jump of each CoeffSetPR field across the threshold.

    rho_l^h is swept through ``C_h p_l`` at a spacing of ``spacing`` times
    the threshold. A smooth field changes by about its slope times the
    spacing between adjacent samples, so the jump is the departure of the two
    differences that straddle the threshold from the difference just below
    it, where every field is affine in rho_l^h. Values are relative
    to the field at the threshold; ``acc_w`` vanishes there and is measured
    against the full-liquid water storage ``phi rho_w``.
    """
    thr = fluid.C_h * p_l
    k = np.arange(-half_width, half_width + 1)
    r = thr * (1.0 + spacing * k)
    c = coeffs_pr(np.full(r.shape, p_l), r, rock, fluid)
    at = coeffs_pr(p_l, thr, rock, fluid)
    out = {}
    for name in c._fields:
        d = np.diff(np.asarray(getattr(c, name)))
        trend = d[half_width - 2]  # both samples below the threshold
        cross = d[half_width - 1:half_width + 1]
        scale = abs(float(getattr(at, name)))
        if name == "acc_w":
            scale = rock.phi * fluid.rho_w_std
        out[name] = float(np.max(np.abs(cross - trend))) / scale
    return out


def check_coefficient_continuity(tol=1e-8, pressures=(1e6,)) -> CheckResult:
    fl = FluidParams()
    worst, where = 0.0, ""
    for rock in benchmark_rocks():
        for p in pressures:
            for name, jump in coefficient_jumps(rock, fl, p_l=p).items():
                if jump > worst:
                    worst, where = jump, f"{name} on {rock.name} at p_l={p:g}"
    return _result("coefficient continuity across threshold", worst, tol, where)


def _random_admissible(rng, rock, fluid, n):
    p = rng.uniform(1e5, 1e7, n)
    pi = rng.uniform(-5e6, 5e7, n)
    r = np.maximum(fluid.C_h * (p + pi), 0.0)
    return p, r


def check_a22_positive(n_samples=1000, seed=3) -> CheckResult:
    rng = np.random.default_rng(seed)
    fl = FluidParams()
    worst = math.inf
    for rock in benchmark_rocks():
        p, r = _random_admissible(rng, rock, fl, n_samples)
        for pk, rk in zip(p, r):
            c = coeffs_pr(pk, rk, rock, fl)
            xi = rng.normal(size=3)
            q = quadratic_form_check(c, xi) / (rock.phi * fl.D * float(np.dot(xi, xi)))
            worst = min(worst, q)
    # value reported is the smallest normalized form; it must be positive
    return CheckResult("A22 quadratic form positivity", bool(worst > 0.0), worst, 0.0,
                       "min of xi.A22.xi / (phi D |xi|^2)")


def check_accumulation_bound(n_samples=300, seed=4) -> CheckResult:
    """d(a* rho_l^h)/d rho_l^h >= 1 at fixed p_l, by central differences."""
    rng = np.random.default_rng(seed)
    fl = FluidParams()
    worst = math.inf
    for rock in benchmark_rocks():
        p, r = _random_admissible(rng, rock, fl, n_samples)
        r = np.maximum(r, fl.C_h * 1e3)
        h = 1e-7 * r
        up = coeffs_pr(p, r + h, rock, fl).acc_h
        dn = coeffs_pr(p, r - h, rock, fl).acc_h
        d = (up - dn) / (2 * h) / rock.phi
        worst = min(worst, float(np.min(d)))
    return CheckResult("hydrogen accumulation slope >= 1", bool(worst >= 1.0 - 1e-6),
                       worst, 1.0, "min of d(a* rho)/d rho")


def chain_rule_mismatch(rock, fluid, p1, r1, p2, r2, gravity=0.0):
    """Relative difference of the two formulations' fluxes on a two-cell pair.

    Coefficients are taken at the mean state; the rho_tot gradient follows
    from the rho_l^h and p_l differences through the analytic partials of
    ``rho_tot = a*(f(pi)) rho_l^h``.
    """
    pm, rm = 0.5 * (p1 + p2), 0.5 * (r1 + r2)
    sec = secondary_state(CellState(pm, rm), rock, fluid)
    S = float(sec.S_g)
    kappa = fluid.C_v / fluid.C_h - 1.0
    fprime = 1.0 / float(dpc_dSg(S, rock)) if S > 0 else 0.0
    dT_dr = 1.0 + kappa * S + rm * kappa * fprime / fluid.C_h
    dT_dp = -rm * kappa * fprime
    gp, gr = p2 - p1, r2 - r1
    gt = dT_dp * gp + dT_dr * gr
    cp = coeffs_pr(pm, rm, rock, fluid)
    ct = coeffs_total(pm, float(sec.rho_tot), rock, fluid)
    a = fluxes_pr(cp, gp, gr, rock.k, gravity)
    b = fluxes_total(ct, gp, gt, rock.k, gravity)
    scale_w = abs(cp.A11 * gp) + abs(cp.A12 * gr) + abs(cp.B1 * rock.k * gravity)
    scale_h = abs(cp.A21 * gp) + abs(cp.A22 * gr) + abs(cp.B2 * rock.k * gravity)
    return max(abs(a[0] - b[0]) / scale_w, abs(a[1] - b[1]) / scale_h)


def check_formulation_equivalence(n_pairs=200, seed=5, tol=1e-8) -> CheckResult:
    rng = np.random.default_rng(seed)
    fl = FluidParams()
    worst = 0.0
    for rock in benchmark_rocks():
        for _ in range(n_pairs):
            p1 = rng.uniform(5e5, 5e6)
            pi = 10.0 ** rng.uniform(2, 7)
            r1 = fl.C_h * (p1 + pi)
            p2 = p1 + rng.uniform(-1, 1) * 0.1 * pi
            r2 = r1 + fl.C_h * rng.uniform(-1, 1) * 0.1 * pi
            g = rng.choice([0.0, 9.81])
            worst = max(worst, chain_rule_mismatch(rock, fl, p1, r1, p2, r2, g))
    return _result("PR vs total formulation fluxes", worst, tol)


# -- conservation -----------------------------------------------------------

def reduced_saturated_residual(scenario: Scenario, p_old, r_old, p, r, dt):
    """Residual of the liquid-saturated equations, written cell by cell.

    Water: div(rho_w q_l - j) = 0. Hydrogen: phi d(rho)/dt + div(rho q_l + j) = 0,
    with q_l = -k/mu_l (grad p - (rho_w + rho) g) and j = -phi D grad rho.
    """
    fl = scenario.fluid
    mesh = scenario.mesh
    A = mesh.cross_section
    x = mesh.centers
    w = mesh.widths
    rocks = scenario.cell_rocks()
    g = scenario.gravity
    n = mesh.n_cells

    def face(pL, rL, kL, phL, dL, pR, rR, kR, phR, dR, dz):
        T = A / (dL / kL + dR / kR)
        TD = A * fl.D / (dL / phL + dR / phR)
        dphi = (pR - pL) - (fl.rho_w_std + 0.5 * (rL + rR)) * g * dz
        q = -T * dphi / fl.mu_l
        r_up = rL if dphi <= 0 else rR
        j = -TD * (rR - rL)
        return fl.rho_w_std * q - j, r_up * q + j

    Fw = [0.0] * (n + 1)
    Fh = [0.0] * (n + 1)
    for i in range(n - 1):
        a, b = rocks[i], rocks[i + 1]
        Fw[i + 1], Fh[i + 1] = face(p[i], r[i], a.k, a.phi, 0.5 * w[i],
                                    p[i + 1], r[i + 1], b.k, b.phi, 0.5 * w[i + 1],
                                    x[i + 1] - x[i])
    for bc, i, face_i in ((scenario.bc_left, 0, 0), (scenario.bc_right, n - 1, n)):
        rk = rocks[i]
        if bc.kind == "neumann":
            s = 1.0 if face_i == 0 else -1.0
            Fw[face_i], Fh[face_i] = s * A * bc.water_flux, s * A * bc.hydrogen_flux
        elif face_i == 0:
            Fw[0], Fh[0] = face(bc.p_l, bc.rho_l_h, rk.k, rk.phi, 0.0,
                                p[0], r[0], rk.k, rk.phi, 0.5 * w[0], x[0])
        else:
            Fw[n], Fh[n] = face(p[i], r[i], rk.k, rk.phi, 0.5 * w[i],
                                bc.p_l, bc.rho_l_h, rk.k, rk.phi, 0.0, mesh.length - x[i])
    R_w = np.array([Fw[i + 1] - Fw[i] for i in range(n)])
    R_h = np.array([rocks[i].phi * w[i] * A * (r[i] - r_old[i]) / dt + Fh[i + 1] - Fh[i]
                    for i in range(n)])
    return R_w, R_h, np.array(Fw), np.array(Fh)


def saturated_test_scenario(n_cells=20, gravity=9.81) -> Scenario:
    fl = FluidParams()
    rocks = (RockParams(5e-20, 0.15, 2e6, 1.49, 0.4, name="a"),
             RockParams(1e-18, 0.3, 2e6, 1.54, 0.01, name="b"))
    return Scenario(
        name="saturated-oracle",
        mesh=Mesh1D(2.0, n_cells),
        rocks=rocks,
        rock_zones=(Zone(-math.inf, 0.8), Zone(0.8, math.inf)),
        fluid=fl,
        bc_left=BoundaryCondition.dirichlet("left", 1.3e6, 0.4 * fl.C_h * 1e6),
        bc_right=BoundaryCondition.dirichlet("right", 1.0e6, 0.1 * fl.C_h * 1e6),
        initial=(InitialZone(-math.inf, math.inf, 1e6, 0.0),),
        t_end=1e6, dt_init=1e3, dt_min=1.0, dt_max=1e5,
        gravity=gravity,
    )


def check_saturated_oracle(seed=6, tol=1e-12) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for gravity in (0.0, 9.81):
        sc = saturated_test_scenario(gravity=gravity)
        asm = Assembler(sc)
        fl = sc.fluid
        n = sc.mesh.n_cells
        for _ in range(5):
            p = 1e6 + rng.uniform(0, 3e5, n)
            r = fl.C_h * rng.uniform(0.0, 0.9, n) * 1e6
            p_old = 1e6 + rng.uniform(0, 3e5, n)
            r_old = fl.C_h * rng.uniform(0.0, 0.9, n) * 1e6
            assert np.all(asm.cell_fields(p, r).S_g == 0)
            dt = 1e4
            R_w, R_h = asm.residual(p_old, r_old, p, r, dt)
            Q_w, Q_h, Fw, Fh = reduced_saturated_residual(sc, p_old, r_old, p, r, dt)
            scale_w = np.max(np.abs(Fw))
            store = sc.mesh.volumes * np.array([rk.phi for rk in sc.cell_rocks()]) / dt
            scale_h = max(np.max(np.abs(Fh)), np.max(store * np.abs(r - r_old)))
            worst = max(worst, float(np.max(np.abs(R_w - Q_w)) / scale_w),
                        float(np.max(np.abs(R_h - Q_h)) / scale_h))
    return _result("saturated residual vs reduced assembly", worst, tol)


def _random_state(rng, scenario, margin=1e4):
    """Random (p_l, rho_l^h) with |pi| >= ``margin`` so no cell sits on the kink."""
    n = scenario.mesh.n_cells
    fl = scenario.fluid
    p = 1e6 + rng.uniform(-2e5, 2e5, n)
    mag = 10.0 ** rng.uniform(math.log10(margin), 6.0, n)
    pi = np.where(rng.random(n) < 0.5, -mag, mag)
    r = np.maximum(fl.C_h * (p + pi), 0.0)
    return p, r


def taylor_errors(n_states=10, seed=7, eps=1e-5, n_cells=30):
    """Relative error of J v against central differences of the residual."""
    rng = np.random.default_rng(seed)
    errs = []
    for k in range(n_states):
        sc = build_case(k % 4 + 1, n_cells=n_cells)
        asm = Assembler(sc)
        p_old, r_old = _random_state(rng, sc)
        p, r = _random_state(rng, sc)
        dt = sc.dt_init
        acc_old = asm.old_accumulation(p_old, r_old)
        x = asm.to_scaled(p, r)
        J = banded_to_dense(asm.jacobian(p_old, r_old, p, r, dt, acc_old), x.size)
        v = rng.normal(size=x.size)
        v /= np.linalg.norm(v, np.inf)
        Rp = asm.scaled_residual(p_old, r_old, *asm.from_scaled(x + eps * v), dt, acc_old)
        Rm = asm.scaled_residual(p_old, r_old, *asm.from_scaled(x - eps * v), dt, acc_old)
        dR = (Rp - Rm) / (2 * eps)
        errs.append(float(np.linalg.norm(J @ v - dR) / np.linalg.norm(dR)))
    return errs


def check_jacobian_taylor(tol=1e-5) -> CheckResult:
    errs = taylor_errors()
    return _result("Jacobian Taylor test", max(errs), tol, f"{len(errs)} states")


def check_closed_telescoping(n_states=5, seed=8, tol=1e-12) -> CheckResult:
    """Closed domain: sum of cell residuals equals the total storage change rate."""
    rng = np.random.default_rng(seed)
    sc = build_case(4, n_cells=60)
    asm = Assembler(sc)
    worst = 0.0
    for _ in range(n_states):
        p_old, r_old = _random_state(rng, sc)
        p, r = _random_state(rng, sc)
        dt = 10.0
        R_w, R_h = asm.residual(p_old, r_old, p, r, dt)
        mw1, mh1 = asm.masses(p, r)
        mw0, mh0 = asm.masses(p_old, r_old)
        fx = asm.fluxes(p, r)
        for R, dm, m, F in ((R_w, mw1 - mw0, mw1, fx.F_w), (R_h, mh1 - mh0, mh1, fx.F_h)):
            scale = max(abs(m) / dt, float(np.max(np.abs(F))))
            worst = max(worst, abs(float(np.sum(R)) - dm / dt) / scale)
    return _result("closed-domain ledger telescoping", worst, tol)


def check_flux_antisymmetry(n_states=200, seed=9, tol=1e-14) -> CheckResult:
    from .assembly import FaceGeometry, face_fluxes
    rng = np.random.default_rng(seed)
    fl = FluidParams()
    rocks = benchmark_rocks()
    worst = 0.0
    for _ in range(n_states):
        ra, rb = rocks[rng.integers(len(rocks))], rocks[rng.integers(len(rocks))]
        pa, pb = 1e6 + rng.uniform(-3e5, 3e5, 2)
        L = CellState(pa, max(fl.C_h * (pa + rng.uniform(-1e6, 1e6)), 0.0))
        R = CellState(pb, max(fl.C_h * (pb + rng.uniform(-1e6, 1e6)), 0.0))
        dl, dr = rng.uniform(0.1, 2.0, 2)
        f = face_fluxes(L, R, FaceGeometry(dl, dr), (ra, rb), fl)
        b = face_fluxes(R, L, FaceGeometry(dr, dl), (rb, ra), fl)
        scale = max(abs(f.water), abs(f.hydrogen), 1e-300)
        worst = max(worst, abs(f.water + b.water) / max(abs(f.water), 1e-300),
                    abs(f.hydrogen + b.hydrogen) / max(abs(f.hydrogen), 1e-300))
        del scale
    return _result("face flux antisymmetry", worst, tol)


SUITES: dict[str, list[Callable[[], CheckResult]]] = {
    "phase": [check_capillary_roundtrip, check_saturation_monotone, check_unilateral,
              check_phase_threshold_continuity],
    "coeffs": [check_coefficient_continuity, check_a22_positive, check_accumulation_bound,
               check_formulation_equivalence],
    "conservation": [check_saturated_oracle, check_jacobian_taylor,
                     check_closed_telescoping, check_flux_antisymmetry],
}


def run_suite(name: str) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return [check() for check in SUITES[name]]
