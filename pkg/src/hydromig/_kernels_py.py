"""NumPy implementation of the assembly kernels.

Reference path and import-time fallback for the compiled ``_kernels``
extension; both expose the same two functions with the same signatures.
"""
import numpy as np

EPS_SAT = 1e-9


def cell_props(p, r, P_r, n, S_lr, S_gr, C_h, mu_l, mu_g):
    """Gas saturation and phase mobilities for every cell.

    Returns ``(S_g, lam_l, lam_g)``.
    """
    m = 1.0 - 1.0 / n
    span = 1.0 - S_lr - S_gr
    pi = r / C_h - p
    gas = pi > 0.0
    x = (np.where(gas, pi, 0.0) / P_r) ** n
    u = -np.expm1(-m * np.log1p(x))
    u = np.where(gas, np.minimum(u, 1.0 - EPS_SAT), 0.0)
    S_g = np.where(gas, S_gr + u * span, 0.0)
    log_sle = np.log1p(-u)
    v = -np.expm1(log_sle / m)
    with np.errstate(divide="ignore"):
        log_v = np.log(v)
    lam_l = np.where(gas, np.sqrt(1.0 - u) * (1.0 - np.exp(m * log_v)) ** 2, 1.0) / mu_l
    lam_g = np.where(gas, np.sqrt(u) * np.exp(2.0 * m * log_v), 0.0) / mu_g
    return S_g, lam_l, lam_g


def pair_fluxes(pL, rL, SgL, llL, lgL, pR, rR, SgR, llR, lgR, Tk, Td, gdx,
                rho_w, C_h, C_v):
    """Two-point fluxes from the L cell to the R cell (positive L -> R).

    ``Tk`` is A / sum(d/k), ``Td`` is A D / sum(d/phi), ``gdx`` is
    g_x (x_R - x_L). Returns ``(F_w, F_h, q_l, q_g)`` in kg/s, kg/s, m^3/s,
    m^3/s.
    """
    rho_l_avg = rho_w + 0.5 * (rL + rR)
    dphi_l = (pR - pL) - rho_l_avg * gdx
    up_l = dphi_l <= 0.0
    q_l = -Tk * np.where(up_l, llL, llR) * dphi_l
    pgL = rL / C_h
    pgR = rR / C_h
    dphi_g = (pgR - pgL) - 0.5 * C_v * (pgL + pgR) * gdx
    up_g = dphi_g <= 0.0
    q_g = -Tk * np.where(up_g, lgL, lgR) * dphi_g
    j = -Td * (1.0 - 0.5 * (SgL + SgR)) * (rR - rL)
    F_h = np.where(up_l, rL, rR) * q_l + C_v * np.where(up_g, pgL, pgR) * q_g + j
    F_w = rho_w * q_l - j
    return F_w, F_h, q_l, q_g
