import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcnwave import (
    InnerTimeChart, RadialPotential, closed_form_tau, completeness_report, dual_potential,
    geometry_profile, r_of_tau, tau_many, tau_of_r,
)
from rcnwave.errors import OutOfDomain, OutOfRange, ZeroW

PS = RadialPotential.power_singular(1, 0.5, 3)
SCH = RadialPotential.schwarzschild(1.0, 1.0)
DS = RadialPotential.de_sitter(1.0)


@pytest.mark.parametrize("p, r_ref, r, expected", [
    (RadialPotential.minkowski(3), 0.0, 0.7, 0.7),
    (PS, 0.0, 1.0, 1.0),
    (DS, 0.0, 0.5, 0.5 * math.log(3.0)),
])
def test_tau_values(p, r_ref, r, expected):
    assert tau_of_r(p, r_ref, r) == pytest.approx(expected, rel=1e-10)


def test_schwarzschild_closed_form_at_three():
    # (r - 2m) + 2m log(r - 2m) at r = 3 is 1
    assert SCH.closed_tau(3.0) == pytest.approx(1.0, rel=1e-14)


def test_tau_outside_domain():
    with pytest.raises(OutOfDomain):
        tau_of_r(SCH, 3.0, 1.5)


def test_chart_inversion_examples():
    assert r_of_tau(InnerTimeChart.build(RadialPotential.minkowski(3), 0.0, (0.0, 2.0)), 0.7) == pytest.approx(0.7)
    assert r_of_tau(InnerTimeChart.build(PS, 0.0, (0.0, 2.0)), 1.0) == pytest.approx(1.0, rel=1e-10)
    ch = InnerTimeChart.build(DS, 0.0, (0.0, 0.9))
    assert r_of_tau(ch, 0.5 * math.log(3.0)) == pytest.approx(0.5, rel=1e-10)
    with pytest.raises(OutOfRange):
        r_of_tau(ch, 100.0)


def test_geometry_profile_values():
    g = geometry_profile(RadialPotential.minkowski(3), 0.0, 1.0)
    assert (g["q_minus"], g["sigma"], g["w"]) == pytest.approx((1.0, 1.0, 1.0))
    g = geometry_profile(PS, 0.0, 1.0)
    assert g["w"] == pytest.approx(0.25 ** 0.75, rel=1e-10)


def test_dual_potential_examples():
    for beta in (0.1, 0.5, 2.0):
        for r in (1e-3, 0.1, 0.7):
            assert dual_potential(RadialPotential.power_singular(1, beta, 3), 0.0, r) == pytest.approx(0.75, rel=1e-9)
    alpha, n = 0.5, 3
    v = dual_potential(RadialPotential.power_singular(alpha, 0.3, n), 0.0, 0.2)
    assert v == pytest.approx((n - alpha + 1) / (2 * (alpha + 1)), rel=1e-9)
    assert dual_potential(RadialPotential.minkowski(3), 0.0, 1e-4) == pytest.approx(2.0, rel=1e-9)
    with pytest.raises(ZeroW):
        dual_potential(SCH, 3.0, 3.0)


def test_completeness():
    assert completeness_report(SCH, "inner").diverges
    assert completeness_report(DS, "outer").diverges
    assert not completeness_report(PS, "inner").diverges


@settings(max_examples=60, deadline=None)
@given(st.floats(2.0 + 1e-5, 20.0), st.floats(2.0 + 1e-5, 20.0))
def test_tau_monotone_schwarzschild(a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert tau_of_r(SCH, 3.0, lo) < tau_of_r(SCH, 3.0, hi)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.95))
def test_chart_round_trip(r):
    ch = InnerTimeChart.build(DS, 0.0, (0.0, 0.99))
    assert r_of_tau(ch, tau_of_r(DS, 0.0, r)) == pytest.approx(r, rel=1e-8)


@pytest.mark.parametrize("p, rs", [
    (SCH, np.linspace(2.1, 6.0, 7)),
    (DS, np.linspace(0.05, 0.9, 7)),
    (PS, np.linspace(0.05, 2.0, 7)),
    (RadialPotential.coulomb(), np.linspace(0.1, 3.0, 7)),
])
def test_unit_gradient_of_tau(p, rs):
    h = 1e-6 * rs
    d = (closed_form_tau(p, rs[0], rs + h) - closed_form_tau(p, rs[0], rs - h)) / (2 * h)
    np.testing.assert_allclose(d / (np.sqrt(p.q(rs)) ** -1 * np.sqrt(p.g_rr(rs))), 1.0, rtol=1e-6)


def test_tau_many_matches_scalar():
    rs = np.array([2.5, 3.5, 2.2, 7.0])
    np.testing.assert_allclose(tau_many(SCH, 3.0, rs), [tau_of_r(SCH, 3.0, r) for r in rs], rtol=1e-12)
