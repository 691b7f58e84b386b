"""Pointwise PDE coefficients of both formulations.

The solved system in (p_l, rho_l^h) has component mass fluxes

    F_w = -(A11 grad p_l + A12 grad rho_l^h + B1 k g)
    F_h = -(A21 grad p_l + A22 grad rho_l^h + B2 k g)

where the A coefficients already carry the permeability. The same fluxes
written in (p_l, rho_tot) use the ``*t`` coefficients of :class:`CoeffSetTot`.
Those are diagnostics only; nothing is solved in the total variables.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .constitutive import RockParams, dpc_dSg, mobilities_from_gas, pc
from .fluid import FluidParams, a_func, a_star, capillary_inverse


class CoeffSetPR(NamedTuple):
    A11: float
    A12: float
    A21: float
    A22: float
    B1: float
    B2: float
    acc_w: float
    acc_h: float


class CoeffSetTot(NamedTuple):
    A11t: float
    A12t: float
    A21t: float
    A22t: float
    B1t: float
    B2t: float
    N: float
    dSg_dpl: float
    dSg_drho: float
    S_g: float
    rho_l_h: float
    p_g: float


def coeffs_pr(p_l, rho_l_h, rock: RockParams, fluid: FluidParams) -> CoeffSetPR:
    """Coefficients of the (p_l, rho_l^h) system; scalars or same-shape arrays."""
    p_l = np.asarray(p_l, dtype=float)
    r = np.asarray(rho_l_h, dtype=float)
    S_g = np.asarray(capillary_inverse(r / fluid.C_h - p_l, rock))
    lam_l, lam_g = mobilities_from_gas(S_g, rock, fluid.mu_l, fluid.mu_g)
    k, phi, D = rock.k, rock.phi, fluid.D
    rw = fluid.rho_w_std
    C_h, C_v = fluid.C_h, fluid.C_v
    diff = phi * (1.0 - S_g) * D
    out = CoeffSetPR(
        A11=lam_l * rw * k,
        A12=-diff,
        A21=lam_l * r * k,
        A22=lam_g * (C_v / C_h**2) * r * k + diff,
        B1=-lam_l * rw * (rw + r),
        B2=-lam_l * r * (rw + r) - lam_g * (C_v**2 / C_h**2) * r**2,
        acc_w=-phi * rw * S_g,
        acc_h=phi * a_star(S_g, fluid) * r,
    )
    return CoeffSetPR(*(np.asarray(v)[()] for v in out))


def total_to_saturation(p_l: float, rho_tot: float, rock: RockParams,
                        fluid: FluidParams, p_c0: float = 0.0) -> float:
    """Invert ``rho_tot = a(S_g) (p_l + p_c(S_g))`` on the unsaturated branch."""
    if rho_tot < 0:
        raise ValueError("rho_tot must be nonnegative")
    if rho_tot <= fluid.C_h * (p_l + p_c0):
        return 0.0

    def g(S):
        return float(a_func(S, fluid)) * (p_l + float(pc(S, rock))) - rho_tot

    hi = rock.S_g_max
    if g(hi) < 0:
        raise ValueError(
            f"rho_tot={rho_tot:.6g} exceeds the capillary range at p_l={p_l:.6g}"
        )
    return brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def coeffs_total(p_l: float, rho_tot: float, rock: RockParams, fluid: FluidParams,
                 p_c0: float = 0.0) -> CoeffSetTot:
    """Coefficients of the (p_l, rho_tot) form at one point."""
    C_h, C_v = fluid.C_h, fluid.C_v
    C_d = C_v - C_h
    S_g = total_to_saturation(p_l, rho_tot, rock, fluid, p_c0)
    unsat = rho_tot > C_h * (p_l + p_c0)
    a = float(a_func(S_g, fluid))
    if unsat and S_g > 0:
        p_g = p_l + float(pc(S_g, rock))
        dpc = float(dpc_dSg(S_g, rock))
        denom = C_d * rho_tot + a * a * dpc
        N = C_d * rho_tot / denom
        dSg_dpl = -a * a / denom
        dSg_drho = a / denom
    else:
        p_g = rho_tot / C_h
        N = dSg_dpl = dSg_drho = 0.0
    rho_l = min(C_h * p_g, rho_tot)
    lam_l, lam_g = (float(v) for v in mobilities_from_gas(S_g, rock, fluid.mu_l, fluid.mu_g))
    k, rw = rock.k, fluid.rho_w_std
    diff = rock.phi * (1.0 - S_g) * fluid.D * C_h
    return CoeffSetTot(
        A11t=lam_l * rw * k - diff * N,
        A12t=-diff * (1.0 - N) / a,
        A21t=(lam_l * rho_l + lam_g * C_v * p_g * N) * k + diff * N,
        A22t=lam_g * (1.0 - N) / a * C_v * p_g * k + diff * (1.0 - N) / a,
        B1t=-lam_l * rw * (rw + rho_l),
        B2t=-(lam_l * rho_l * (rw + rho_l) + lam_g * C_v**2 * p_g**2),
        N=N,
        dSg_dpl=dSg_dpl,
        dSg_drho=dSg_drho,
        S_g=S_g,
        rho_l_h=rho_l,
        p_g=p_g,
    )


def fluxes_pr(c: CoeffSetPR, grad_p, grad_r, k: float, g: float = 0.0):
    """Component mass fluxes (F_w, F_h) from the (p_l, rho_l^h) coefficients."""
    F_w = -(c.A11 * grad_p + c.A12 * grad_r + c.B1 * k * g)
    F_h = -(c.A21 * grad_p + c.A22 * grad_r + c.B2 * k * g)
    return F_w, F_h


def fluxes_total(c: CoeffSetTot, grad_p, grad_rho_tot, k: float, g: float = 0.0):
    """Component mass fluxes (F_w, F_h) from the (p_l, rho_tot) coefficients."""
    F_w = -(c.A11t * grad_p + c.A12t * grad_rho_tot + c.B1t * k * g)
    F_h = -(c.A21t * grad_p + c.A22t * grad_rho_tot + c.B2t * k * g)
    return F_w, F_h


def quadratic_form_check(coeffs: CoeffSetPR, direction) -> float:
    """``xi . A22 xi``; A22 is isotropic so this is ``A22 |xi|^2``."""
    xi = np.atleast_1d(np.asarray(direction, dtype=float))
    return float(coeffs.A22 * np.dot(xi, xi))
