import mpmath as mp
import pytest

from hydromig import FluidParams, RockParams

mp.mp.dps = 40


@pytest.fixture
def fluid():
    return FluidParams()


@pytest.fixture
def argillite():
    return RockParams(k=5e-20, phi=0.15, P_r=2e6, n=1.49, S_lr=0.4, name="argillite")


@pytest.fixture
def concrete():
    return RockParams(k=1e-18, phi=0.3, P_r=2e6, n=1.54, S_lr=0.01, name="concrete")


# Straight-line vGM formulas in 40-digit arithmetic. Kept separate from the
# package so the tests compare against an independent evaluation.

def vgm_pc(S_g, P_r, n, S_lr, S_gr=0.0):
    S_le = (1 - mp.mpf(S_g) - S_lr) / (1 - S_lr - S_gr)
    m = 1 - mp.mpf(1) / n
    return P_r * (S_le ** (-1 / m) - 1) ** (1 / mp.mpf(n))


def vgm_mobilities(S_le, n, mu_l, mu_g):
    S_le = mp.mpf(S_le)
    m = 1 - mp.mpf(1) / n
    lam_l = mp.sqrt(S_le) * (1 - (1 - S_le ** (1 / m)) ** m) ** 2 / mu_l
    lam_g = mp.sqrt(1 - S_le) * (1 - S_le ** (1 / m)) ** (2 * m) / mu_g
    return lam_l, lam_g


def vgm_inverse(pi, P_r, n, S_lr, S_gr=0.0):
    """S_g with p_c(S_g) = pi by bisection."""
    lo, hi = mp.mpf(0), (1 - S_lr - S_gr) * (1 - mp.mpf("1e-12")) + S_gr
    for _ in range(200):
        mid = (lo + hi) / 2
        if vgm_pc(mid, P_r, n, S_lr, S_gr) < pi:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
