"""Cell-centred finite-volume discretization in (p_l, rho_l^h).

Two-point fluxes with harmonic permeability/porosity means, phase-potential
upwinding of mobilities and transported densities, fully implicit Euler in
time. State vectors are interleaved cell-major: ``[p_0, r_0, p_1, r_1, ...]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .constitutive import RockParams
from .fluid import CellState, FluidParams
from .scenarios import BoundaryCondition, Scenario

P_REF = 1e6  # Pa, unknown scaling for Newton
FD_REL_STEP = 1e-7
BAND = 3  # half bandwidth of the interleaved block-tridiagonal Jacobian


def pack(p, r):
    u = np.empty(2 * len(p))
    u[0::2] = p
    u[1::2] = r
    return u


def unpack(u):
    return u[0::2].copy(), u[1::2].copy()


class FaceFlux(NamedTuple):
    water: float
    hydrogen: float


@dataclass(frozen=True)
class FaceGeometry:
    """Distances from the left and right cell centres to the face, and the face area."""

    d_left: float
    d_right: float
    area: float = 1.0

    @property
    def dx(self):
        return self.d_left + self.d_right


def _rock_arrays(rocks):
    return {
        "P_r": np.array([r.P_r for r in rocks], dtype=float),
        "n": np.array([r.n for r in rocks], dtype=float),
        "S_lr": np.array([r.S_lr for r in rocks], dtype=float),
        "S_gr": np.array([r.S_gr for r in rocks], dtype=float),
    }


def face_fluxes(left: CellState, right: CellState, geom: FaceGeometry,
                rocks: tuple[RockParams, RockParams], fluid: FluidParams,
                gravity: float = 0.0) -> FaceFlux:
    """Water and hydrogen mass fluxes [kg/s] from ``left`` to ``right``."""
    rl, rr = rocks
    A = geom.area
    Tk = A / (geom.d_left / rl.k + geom.d_right / rr.k)
    Td = A * fluid.D / (geom.d_left / rl.phi + geom.d_right / rr.phi)
    pl = np.array([left.p_l, right.p_l], dtype=float)
    rh = np.array([left.rho_l_h, right.rho_l_h], dtype=float)
    ra = _rock_arrays([rl, rr])
    S_g, lam_l, lam_g = kernels.cell_props(pl, rh, ra["P_r"], ra["n"], ra["S_lr"], ra["S_gr"],
                                           fluid.C_h, fluid.mu_l, fluid.mu_g)
    F_w, F_h, _, _ = kernels.pair_fluxes(
        pl[:1], rh[:1], S_g[:1], lam_l[:1], lam_g[:1],
        pl[1:], rh[1:], S_g[1:], lam_l[1:], lam_g[1:],
        np.array([Tk]), np.array([Td]), np.array([gravity * geom.dx]),
        fluid.rho_w_std, fluid.C_h, fluid.C_v)
    return FaceFlux(float(F_w[0]), float(F_h[0]))


def apply_boundary(bc: BoundaryCondition, cell: CellState, rock: RockParams,
                   half_width: float, fluid: FluidParams, area: float = 1.0,
                   gravity: float = 0.0) -> FaceFlux:
    """Flux through a domain end, positive toward increasing x.

    Neumann data are inward mass fluxes per unit area. Dirichlet data define
    a ghost state on the face itself, half a cell from the adjacent centre,
    evaluated with the adjacent cell's rock.
    """
    sign = 1.0 if bc.side == "left" else -1.0
    if bc.kind == "neumann":
        return FaceFlux(sign * area * bc.water_flux, sign * area * bc.hydrogen_flux)
    ghost = CellState(bc.p_l, bc.rho_l_h)
    if bc.side == "left":
        return face_fluxes(ghost, cell, FaceGeometry(0.0, half_width, area), (rock, rock),
                           fluid, gravity)
    return face_fluxes(cell, ghost, FaceGeometry(half_width, 0.0, area), (rock, rock),
                       fluid, gravity)


class CellFields(NamedTuple):
    S_g: np.ndarray
    lam_l: np.ndarray
    lam_g: np.ndarray


class Fluxes(NamedTuple):
    """Face quantities on all n+1 faces (boundary faces included) [kg/s, m^3/s]."""

    F_w: np.ndarray
    F_h: np.ndarray
    q_l: np.ndarray
    q_g: np.ndarray


class Assembler:
    """Precomputed geometry and rock data for one scenario."""

    def __init__(self, scenario: Scenario):
        self.scenario = sc = scenario
        self.fluid = fl = scenario.fluid
        mesh = sc.mesh
        self.n = n = mesh.n_cells
        self.area = A = mesh.cross_section
        self.volumes = mesh.volumes
        rocks = sc.cell_rocks()
        self.rocks = rocks
        ra = _rock_arrays(rocks)
        self.P_r, self.n_vg, self.S_lr, self.S_gr = ra["P_r"], ra["n"], ra["S_lr"], ra["S_gr"]
        self.k = np.array([r.k for r in rocks])
        self.phi = np.array([r.phi for r in rocks])
        self.pore_volume = self.phi * self.volumes
        half = 0.5 * mesh.widths
        g = sc.gravity
        self.Tk = A / (half[:-1] / self.k[:-1] + half[1:] / self.k[1:])
        self.Td = A * fl.D / (half[:-1] / self.phi[:-1] + half[1:] / self.phi[1:])
        self.gdx = g * np.diff(mesh.centers)
        self.half = half
        self.rho_ref = fl.C_h * P_REF
        self._bnd = {}
        for bc, i, x_face in ((sc.bc_left, 0, 0.0), (sc.bc_right, n - 1, mesh.length)):
            if bc.kind == "dirichlet":
                self._bnd[bc.side] = dict(
                    i=i,
                    p=np.array([bc.p_l]),
                    r=np.array([bc.rho_l_h]),
                    rock=[s[i:i + 1] for s in (self.P_r, self.n_vg, self.S_lr, self.S_gr)],
                    Tk=np.array([A * self.k[i] / half[i]]),
                    Td=np.array([A * fl.D * self.phi[i] / half[i]]),
                    # ghost is the L state on the left face, the R state on the right
                    gdx=np.array([g * abs(x_face - mesh.centers[i])]),
                )

    # -- pointwise fields ---------------------------------------------------
    def cell_fields(self, p, r) -> CellFields:
        fl = self.fluid
        return CellFields(*kernels.cell_props(
            np.ascontiguousarray(p, dtype=float), np.ascontiguousarray(r, dtype=float),
            self.P_r, self.n_vg, self.S_lr, self.S_gr, fl.C_h, fl.mu_l, fl.mu_g))

    def accumulation(self, r, cf: CellFields):
        """Water and hydrogen mass per cell [kg]."""
        fl = self.fluid
        water = self.pore_volume * fl.rho_w_std * (1.0 - cf.S_g)
        rho_tot = (1.0 + (fl.C_v / fl.C_h - 1.0) * cf.S_g) * r
        return water, self.pore_volume * rho_tot

    def masses(self, p, r):
        w, h = self.accumulation(r, self.cell_fields(p, r))
        return float(np.sum(w)), float(np.sum(h))

    # -- fluxes ---------------------------------------------------------------
    def fluxes(self, p, r, cf: CellFields | None = None) -> Fluxes:
        fl = self.fluid
        n = self.n
        if cf is None:
            cf = self.cell_fields(p, r)
        F_w = np.empty(n + 1)
        F_h = np.empty(n + 1)
        q_l = np.zeros(n + 1)
        q_g = np.zeros(n + 1)
        if n > 1:
            fw, fh, ql, qg = kernels.pair_fluxes(
                p[:-1], r[:-1], cf.S_g[:-1], cf.lam_l[:-1], cf.lam_g[:-1],
                p[1:], r[1:], cf.S_g[1:], cf.lam_l[1:], cf.lam_g[1:],
                self.Tk, self.Td, self.gdx, fl.rho_w_std, fl.C_h, fl.C_v)
            F_w[1:-1], F_h[1:-1], q_l[1:-1], q_g[1:-1] = fw, fh, ql, qg
        sc = self.scenario
        for bc, face in ((sc.bc_left, 0), (sc.bc_right, n)):
            sign = 1.0 if face == 0 else -1.0
            if bc.kind == "neumann":
                F_w[face] = sign * self.area * bc.water_flux
                F_h[face] = sign * self.area * bc.hydrogen_flux
                q_l[face] = F_w[face] / fl.rho_w_std
                continue
            b = self._bnd[bc.side]
            i = b["i"]
            gS, gl, gg = kernels.cell_props(b["p"], b["r"], *b["rock"], fl.C_h, fl.mu_l, fl.mu_g)
            cell = (p[i:i + 1], r[i:i + 1], cf.S_g[i:i + 1], cf.lam_l[i:i + 1], cf.lam_g[i:i + 1])
            ghost = (b["p"], b["r"], gS, gl, gg)
            L, R = (ghost, cell) if face == 0 else (cell, ghost)
            fw, fh, ql, qg = kernels.pair_fluxes(*L, *R, b["Tk"], b["Td"], b["gdx"],
                                                 fl.rho_w_std, fl.C_h, fl.C_v)
            F_w[face], F_h[face], q_l[face], q_g[face] = fw[0], fh[0], ql[0], qg[0]
        return Fluxes(F_w, F_h, q_l, q_g)

    # -- residual and Jacobian ---------------------------------------------
    def old_accumulation(self, p_old, r_old):
        return self.accumulation(r_old, self.cell_fields(p_old, r_old))

    def residual(self, p_old, r_old, p, r, dt, acc_old=None):
        """Cell mass balances (R_w, R_h) in kg/s: storage rate plus net outflow."""
        p = np.ascontiguousarray(p, dtype=float)
        r = np.ascontiguousarray(r, dtype=float)
        if acc_old is None:
            acc_old = self.old_accumulation(p_old, r_old)
        cf = self.cell_fields(p, r)
        acc_w, acc_h = self.accumulation(r, cf)
        fx = self.fluxes(p, r, cf)
        R_w = (acc_w - acc_old[0]) / dt + fx.F_w[1:] - fx.F_w[:-1]
        R_h = (acc_h - acc_old[1]) / dt + fx.F_h[1:] - fx.F_h[:-1]
        return R_w, R_h

    def residual_scales(self, dt):
        """Per-cell divisors turning (R_w, R_h) into saturation-like units."""
        pv = self.pore_volume / dt
        return pv * self.fluid.rho_w_std, pv * self.rho_ref

    def scaled_residual(self, p_old, r_old, p, r, dt, acc_old=None):
        R_w, R_h = self.residual(p_old, r_old, p, r, dt, acc_old)
        s_w, s_h = self.residual_scales(dt)
        return pack(R_w / s_w, R_h / s_h)

    def to_scaled(self, p, r):
        return pack(np.asarray(p) / P_REF, np.asarray(r) / self.rho_ref)

    def from_scaled(self, x):
        xs_p, xs_r = unpack(x)
        return xs_p * P_REF, xs_r * self.rho_ref

    def jacobian(self, p_old, r_old, p, r, dt, acc_old=None, base=None):
        """Banded FD Jacobian of the scaled residual w.r.t. scaled unknowns.

        Returns ``ab`` in ``scipy.linalg.solve_banded`` layout with
        ``(BAND, BAND)`` sub/super diagonals. Cells are perturbed three at a
        time (distance-3 colouring of the TPFA stencil). A perturbation that
        would carry a cell across the phase threshold is taken one-sided in
        the opposite direction.
        """
        n = self.n
        if acc_old is None:
            acc_old = self.old_accumulation(p_old, r_old)
        x = self.to_scaled(p, r)
        if base is None:
            base = self.scaled_residual(p_old, r_old, p, r, dt, acc_old)
        h = FD_REL_STEP * np.maximum(np.abs(x), 1.0)
        xs_p, xs_r = x[0::2], x[1::2]
        pi = xs_r - xs_p
        # pick the step sign that keeps the cell on its side of the threshold
        h_p = h[0::2].copy()
        h_r = h[1::2].copy()
        flip_p = (pi > 0) & (pi - h_p <= 0)
        h_p[flip_p] *= -1.0
        flip_r = (pi <= 0) & (pi + h_r > 0) & (xs_r - h_r >= 0)
        h_r[flip_r] *= -1.0
        steps = (h_p, h_r)

        ab = np.zeros((2 * BAND + 1, 2 * n))
        cells = np.arange(n)
        for color in range(3):
            pert = cells[cells % 3 == color]
            # perturbed cell that influences row-cell i for this colour
            owner = cells + ((color - cells + 1) % 3) - 1
            valid = (owner >= 0) & (owner < n)
            rows_i = cells[valid]
            cols_j = owner[valid]
            for v in range(2):
                xp = x.copy()
                xp[2 * pert + v] += steps[v][pert]
                pp, rp = self.from_scaled(xp)
                Rp = self.scaled_residual(p_old, r_old, pp, rp, dt, acc_old)
                dR = (Rp - base).reshape(n, 2)
                col = 2 * cols_j + v
                hj = steps[v][cols_j]
                for e in range(2):
                    row = 2 * rows_i + e
                    ab[BAND + row - col, col] = dR[rows_i, e] / hj
        return ab


def banded_to_dense(ab, n_rows):
    J = np.zeros((n_rows, n_rows))
    for d in range(-BAND, BAND + 1):
        for col in range(n_rows):
            row = col + d
            if 0 <= row < n_rows:
                J[row, col] = ab[BAND + d, col]
    return J


_CACHE: dict[int, Assembler] = {}


def _assembler(scenario: Scenario) -> Assembler:
    key = id(scenario)
    asm = _CACHE.get(key)
    if asm is None or asm.scenario is not scenario:
        asm = _CACHE[key] = Assembler(scenario)
    return asm


def residual(old, new, dt, scenario: Scenario):
    """Interleaved residual vector for state vectors ``old`` and ``new``."""
    asm = _assembler(scenario)
    R_w, R_h = asm.residual(*unpack(old), *unpack(new), dt)
    return pack(R_w, R_h)


def jacobian(old, new, dt, scenario: Scenario):
    """Dense FD Jacobian of the scaled residual in scaled unknowns."""
    asm = _assembler(scenario)
    ab = asm.jacobian(*unpack(old), *unpack(new), dt)
    return banded_to_dense(ab, 2 * asm.n)
