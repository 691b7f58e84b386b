import mpmath as mp
import numpy as np
import pytest

from hydromig import CellState, secondary_state
from hydromig.coefficients import (CoeffSetPR, coeffs_pr, coeffs_total, fluxes_pr,
                                   fluxes_total, quadratic_form_check,
                                   total_to_saturation)
from hydromig.verify import chain_rule_mismatch, coefficient_jumps

from conftest import vgm_inverse, vgm_mobilities


def test_saturated_state_reduces(argillite, fluid):
    c = coeffs_pr(1e6, 1e-2, argillite, fluid)
    assert c.A12 == -argillite.phi * fluid.D
    assert c.A22 == argillite.phi * fluid.D
    assert c.A11 == pytest.approx(argillite.k * fluid.rho_w_std / fluid.mu_l, rel=1e-15)
    assert c.acc_w == 0.0


def test_zero_hydrogen_kills_hydrogen_terms(argillite, fluid):
    c = coeffs_pr(1e6, 0.0, argillite, fluid)
    assert c.A21 == 0.0 and c.B2 == 0.0 and c.acc_h == 0.0


def test_against_straight_line_evaluation(argillite, fluid):
    p, r = mp.mpf(10) ** 6, mp.mpf("1.8e-2")
    C_h = mp.mpf("7.65e-6") * mp.mpf("2e-3")
    C_v = mp.mpf("2e-3") / (mp.mpf("8.314") * 303)
    k, phi, D, rw = mp.mpf("5e-20"), mp.mpf("0.15"), mp.mpf("3e-9"), mp.mpf(1000)
    S = vgm_inverse(r / C_h - p, 2e6, 1.49, 0.4)
    lam_l, lam_g = vgm_mobilities((1 - S - mp.mpf("0.4")) / mp.mpf("0.6"), 1.49,
                                  mp.mpf("1e-3"), mp.mpf("9e-6"))
    expected = dict(
        A11=lam_l * rw * k,
        A12=-phi * (1 - S) * D,
        A21=lam_l * r * k,
        A22=lam_g * C_v / C_h**2 * r * k + phi * (1 - S) * D,
        B1=-lam_l * rw * (rw + r),
        B2=-lam_l * r * (rw + r) - lam_g * C_v**2 / C_h**2 * r**2,
        acc_w=-phi * rw * S,
        acc_h=phi * (1 + (C_v / C_h - 1) * S) * r,
    )
    c = coeffs_pr(1e6, 1.8e-2, argillite, fluid)
    for name, val in expected.items():
        assert getattr(c, name) == pytest.approx(float(val), rel=1e-9), name


def test_vectorized_matches_scalar(argillite, fluid):
    p = np.array([1e6, 2e6, 5e5])
    r = fluid.C_h * np.array([0.5e6, 2.5e6, 4e6])
    vec = coeffs_pr(p, r, argillite, fluid)
    for i in range(3):
        one = coeffs_pr(p[i], r[i], argillite, fluid)
        for name in CoeffSetPR._fields:
            assert getattr(vec, name)[i] == getattr(one, name)


def test_a11_a21_vanish_as_gas_fills(concrete, fluid):
    p = 1e6
    r = fluid.C_h * (p + 1e12)  # saturation pinned at S_g_max
    c = coeffs_pr(p, r, concrete, fluid)
    assert abs(c.A11) < 1e-12 * concrete.k * fluid.rho_w_std / fluid.mu_l
    assert abs(c.A21) < 1e-12 * concrete.k * r / fluid.mu_l


def test_quadratic_form(argillite, fluid):
    c = coeffs_pr(1e6, 0.0, argillite, fluid)
    assert quadratic_form_check(c, 1.0) == pytest.approx(argillite.phi * fluid.D, rel=1e-15)
    r = fluid.C_h * (1e6 + float(mp.mpf(1e7)))
    c = coeffs_pr(1e6, r, argillite, fluid)
    assert quadratic_form_check(c, [1.0, -2.0, 0.5]) > 0


def test_total_saturated_branch(argillite, fluid):
    c = coeffs_total(1e6, 1e-2, argillite, fluid)
    assert c.N == 0.0 and c.dSg_dpl == 0.0 and c.dSg_drho == 0.0 and c.S_g == 0.0


def test_total_unsaturated_signs(argillite, fluid):
    sec = secondary_state(CellState(1e6, 1.8e-2), argillite, fluid)
    c = coeffs_total(1e6, float(sec.rho_tot), argillite, fluid)
    assert c.dSg_dpl <= 0 and c.dSg_drho > 0
    assert 0 <= c.N < 1


@pytest.mark.parametrize("pi", [1e2, 1e4, 1e6, 1e7])
def test_total_round_trip_recovers_saturation(argillite, fluid, pi):
    r = fluid.C_h * (1e6 + pi)
    sec = secondary_state(CellState(1e6, r), argillite, fluid)
    assert total_to_saturation(1e6, float(sec.rho_tot), argillite, fluid) == pytest.approx(
        float(sec.S_g), abs=1e-9)
    c = coeffs_total(1e6, float(sec.rho_tot), argillite, fluid)
    assert c.rho_l_h == pytest.approx(r, rel=1e-9)


def test_total_rejects_out_of_range(argillite, fluid):
    with pytest.raises(ValueError):
        total_to_saturation(1e6, -1.0, argillite, fluid)
    with pytest.raises(ValueError, match="capillary range"):
        total_to_saturation(1e6, 1e300, argillite, fluid)


def test_saturated_fluxes_agree_between_forms(argillite, fluid):
    cp = coeffs_pr(1e6, 1e-2, argillite, fluid)
    ct = coeffs_total(1e6, 1e-2, argillite, fluid)
    a = fluxes_pr(cp, 3.0, 1e-5, argillite.k, 9.81)
    b = fluxes_total(ct, 3.0, 1e-5, argillite.k, 9.81)
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_chain_rule_cross_check(argillite, concrete, fluid):
    rng = np.random.default_rng(11)
    for rock in (argillite, concrete):
        for _ in range(40):
            p1 = rng.uniform(5e5, 5e6)
            pi = 10 ** rng.uniform(2, 7)
            r1 = fluid.C_h * (p1 + pi)
            p2 = p1 + 0.05 * pi * rng.uniform(-1, 1)
            r2 = r1 + 0.05 * fluid.C_h * pi * rng.uniform(-1, 1)
            assert chain_rule_mismatch(rock, fluid, p1, r1, p2, r2, 9.81) < 1e-8


def test_continuity_sweep_smooth_fields(argillite, fluid):
    # fields with no Holder kink at the threshold are continuous to round-off
    jumps = coefficient_jumps(argillite, fluid)
    for name in ("A12", "A22", "acc_w", "acc_h"):
        assert jumps[name] < 1e-8, name


def test_continuity_sweep_liquid_mobility_fields_have_kink(argillite, fluid):
    # lambda_l(S_g) ~ 1 - c S_g^(1/2) near S_g = 0, so adjacent-sample jumps in
    # A11, A21, B1, B2 scale like sqrt(S_g) and stay far above round-off
    jumps = coefficient_jumps(argillite, fluid)
    assert jumps["A11"] > 1e-6
    finer = coefficient_jumps(argillite, fluid, spacing=1e-8)
    assert finer["A11"] < jumps["A11"]
