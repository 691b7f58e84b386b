# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly kernels; same contract as ``_kernels_py``."""
import numpy as np
from libc.math cimport exp, expm1, log, log1p, sqrt

cdef double EPS_SAT = 1e-9


def cell_props(const double[:] p, const double[:] r, const double[:] P_r,
               const double[:] n, const double[:] S_lr, const double[:] S_gr,
               double C_h, double mu_l, double mu_g):
    cdef Py_ssize_t i, N = p.shape[0]
    S_g_a = np.empty(N)
    lam_l_a = np.empty(N)
    lam_g_a = np.empty(N)
    cdef double[:] S_g = S_g_a
    cdef double[:] lam_l = lam_l_a
    cdef double[:] lam_g = lam_g_a
    cdef double m, pi, x, L1, log_x, log_v, s_le, u, v, vm
    for i in range(N):
        pi = r[i] / C_h - p[i]
        if pi <= 0.0:
            S_g[i] = 0.0
            lam_l[i] = 1.0 / mu_l
            lam_g[i] = 0.0
            continue
        m = 1.0 - 1.0 / n[i]
        # x = (pi/P_r)^n, S_le = (1+x)^-m, 1 - S_le^(1/m) = x/(1+x)
        log_x = n[i] * log(pi / P_r[i])
        x = exp(log_x)
        L1 = log1p(x)
        u = -expm1(-m * L1)
        if u > 1.0 - EPS_SAT:
            u = 1.0 - EPS_SAT
            s_le = EPS_SAT
            v = -expm1(log(EPS_SAT) / m)
            log_v = log(v)
        else:
            s_le = exp(-m * L1)
            log_v = log_x - L1
        S_g[i] = S_gr[i] + u * (1.0 - S_lr[i] - S_gr[i])
        vm = exp(m * log_v)
        lam_l[i] = sqrt(s_le) * (1.0 - vm) ** 2 / mu_l
        lam_g[i] = sqrt(u) * vm * vm / mu_g
    return S_g_a, lam_l_a, lam_g_a


def pair_fluxes(const double[:] pL, const double[:] rL, const double[:] SgL,
                const double[:] llL, const double[:] lgL,
                const double[:] pR, const double[:] rR, const double[:] SgR,
                const double[:] llR, const double[:] lgR,
                const double[:] Tk, const double[:] Td, const double[:] gdx,
                double rho_w, double C_h, double C_v):
    cdef Py_ssize_t f, N = pL.shape[0]
    F_w_a = np.empty(N)
    F_h_a = np.empty(N)
    q_l_a = np.empty(N)
    q_g_a = np.empty(N)
    cdef double[:] F_w = F_w_a
    cdef double[:] F_h = F_h_a
    cdef double[:] q_l = q_l_a
    cdef double[:] q_g = q_g_a
    cdef double dphi_l, dphi_g, pgL, pgR, ql, qg, j, r_up, pg_up
    for f in range(N):
        dphi_l = (pR[f] - pL[f]) - (rho_w + 0.5 * (rL[f] + rR[f])) * gdx[f]
        if dphi_l <= 0.0:
            ql = -Tk[f] * llL[f] * dphi_l
            r_up = rL[f]
        else:
            ql = -Tk[f] * llR[f] * dphi_l
            r_up = rR[f]
        pgL = rL[f] / C_h
        pgR = rR[f] / C_h
        dphi_g = (pgR - pgL) - 0.5 * C_v * (pgL + pgR) * gdx[f]
        if dphi_g <= 0.0:
            qg = -Tk[f] * lgL[f] * dphi_g
            pg_up = pgL
        else:
            qg = -Tk[f] * lgR[f] * dphi_g
            pg_up = pgR
        j = -Td[f] * (1.0 - 0.5 * (SgL[f] + SgR[f])) * (rR[f] - rL[f])
        F_h[f] = r_up * ql + C_v * pg_up * qg + j
        F_w[f] = rho_w * ql - j
        q_l[f] = ql
        q_g[f] = qg
    return F_w_a, F_h_a, q_l_a, q_g_a
