"""Fluid constants and the phase-state map (p_l, rho_l^h) -> secondary fields.

The gas phase is present exactly when the dissolved hydrogen exceeds the
Henry equilibrium at the entry pressure,
``rho_l_h > C_h * (p_l + p_c(0))``. Below that line the medium is liquid
saturated and the reported gas pressure is the hypothetical equilibrium
pressure ``rho_l_h / C_h``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .constitutive import EPS_SAT, RockParams, dpc_dSg, pc, pc_inverse_analytic

R_GAS = 8.314  # J/(mol K)


def derive_constants(M_h: float, H: float, T: float, R: float = R_GAS):
    """Henry slope ``C_h = H M_h`` and ideal-gas slope ``C_v = M_h / (R T)``."""
    for name, v in (("M_h", M_h), ("H", H), ("T", T), ("R", R)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    C_h = H * M_h
    C_v = M_h / (R * T)
    if not C_v > C_h:
        raise ValueError(
            f"weak-solubility ordering violated: C_v={C_v:.4g} <= C_h={C_h:.4g}"
        )
    return C_h, C_v


@dataclass(frozen=True)
class FluidParams:
    """Phase and component constants; C_h and C_v are derived on construction."""

    rho_w_std: float = 1.0e3
    mu_l: float = 1.0e-3
    mu_g: float = 9.0e-6
    D: float = 3.0e-9
    M_w: float = 1.0e-2
    M_h: float = 2.0e-3
    H: float = 7.65e-6
    T: float = 303.0
    R: float = R_GAS
    C_h: float = field(init=False)
    C_v: float = field(init=False)

    def __post_init__(self):
        for name in ("rho_w_std", "mu_l", "mu_g", "D", "M_w"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v}")
        C_h, C_v = derive_constants(self.M_h, self.H, self.T, self.R)
        object.__setattr__(self, "C_h", C_h)
        object.__setattr__(self, "C_v", C_v)


class CellState(NamedTuple):
    p_l: float
    rho_l_h: float


class SecondaryState(NamedTuple):
    S_g: float
    S_l: float
    p_g: float
    rho_g: float
    rho_tot: float


def a_func(S_g, fluid: FluidParams):
    """Total-concentration slope ``a(S_g) = C_h (1 - S_g) + C_v S_g``."""
    return fluid.C_h * (1.0 - np.asarray(S_g)) + fluid.C_v * np.asarray(S_g)


def a_star(S_g, fluid: FluidParams):
    return 1.0 + (fluid.C_v / fluid.C_h - 1.0) * np.asarray(S_g)


def _newton_polish(pi, S, rock: RockParams, tol: float):
    # Safeguarded Newton on p_c(S) - pi, bracket [0, S_g_max].
    lo = np.zeros_like(S)
    hi = np.full_like(S, rock.S_g_max)
    for _ in range(50):
        g = pc(S, rock) - pi
        lo = np.where(g < 0, S, lo)
        hi = np.where(g > 0, S, hi)
        d = dpc_dSg(S, rock)
        with np.errstate(divide="ignore", invalid="ignore"):
            S_new = S - g / d
        bad = ~np.isfinite(S_new) | (S_new <= lo) | (S_new >= hi)
        S_new = np.where(bad, 0.5 * (lo + hi), S_new)
        step = np.abs(S_new - S)
        S = S_new
        if np.all(step <= np.maximum(tol, 4 * np.spacing(S))):
            break
    return S


def capillary_inverse(pi, rock: RockParams, p_c0: float = 0.0, return_flag=False):
    """Gas saturation ``f(pi)``: 0 below the entry pressure, else p_c^{-1}(pi).

    The closed-form vGM inverse is the starting point; a bracketed Newton
    polish brings S_g to within a few ulps of the root. Values of pi that would
    need ``S_le < EPS_SAT`` are clamped; with ``return_flag`` a boolean
    mask marking clamped entries is returned as well.
    """
    pi = np.asarray(pi, dtype=float)
    S = np.atleast_1d(pc_inverse_analytic(pi, rock)).astype(float)
    pi1 = np.atleast_1d(pi)
    active = (pi1 > p_c0) & (S > rock.S_gr) & (S < rock.S_g_max)
    if np.any(active):
        S[active] = _newton_polish(pi1[active], S[active], rock, 1e-15)
    S = np.where(pi1 > p_c0, S, 0.0)
    clamped = S >= rock.S_g_max
    S = np.minimum(S, rock.S_g_max).reshape(pi.shape)[()]
    if return_flag:
        return S, clamped.reshape(pi.shape)[()]
    return S


def saturation_from_state(state: CellState, rock: RockParams, fluid: FluidParams):
    p_l, rho = state
    if np.any(np.asarray(rho) < 0):
        raise ValueError("dissolved hydrogen concentration must be nonnegative")
    return capillary_inverse(np.asarray(rho) / fluid.C_h - np.asarray(p_l), rock)


def secondary_state(state: CellState, rock: RockParams, fluid: FluidParams):
    """Derived fields for one cell (or arrays of cells sharing ``rock``)."""
    p_l, rho = (np.asarray(v, dtype=float) for v in state)
    S_g = np.asarray(saturation_from_state(state, rock, fluid))
    gas = S_g > 0
    # unsaturated: p_g = p_l + p_c(S_g); saturated: hypothetical rho/C_h
    S_safe = np.where(gas, np.minimum(S_g, rock.S_g_max), 0.0)
    p_g = np.where(gas, p_l + pc(S_safe, rock), rho / fluid.C_h)
    rho_g = np.where(gas, fluid.C_v * p_g, 0.0)
    rho_tot = np.where(gas, a_func(S_g, fluid) * p_g, rho)
    return SecondaryState(S_g[()], (1.0 - S_g)[()], p_g[()], rho_g[()], rho_tot[()])


def unilateral_residual(state: CellState, sec: SecondaryState, fluid: FluidParams):
    """``S_g (C_h p_g - rho_l_h)`` scaled by ``rho_l_h``; zero on valid states."""
    rho = np.asarray(state.rho_l_h, dtype=float)
    gap = np.asarray(sec.S_g) * (fluid.C_h * np.asarray(sec.p_g) - rho)
    scale = np.maximum(np.abs(rho), fluid.C_h * EPS_SAT)
    return (gap / scale)[()]
