import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rcnwave import (
    SpacetimeModel, light_cone, origin_taylor_ratio, rn_regime, spacetime_tau, uncertainty,
    uncertainty_minimum,
)
from rcnwave.errors import EqualLevels, OnHorizon, OutOfBranch, OutOfDomain, WrongCase
from rcnwave.spacetimes import light_cone_rows

RN = lambda m, e: SpacetimeModel("reissner_nordstrom", {"m": m, "e": e})


@pytest.mark.parametrize("m, e, r, case", [(2, 1, 0.2, 1), (1, 1, 0.5, 4), (1, 2, 7, 7), (2, 1, 5, 3), (1, 1, 3, 6)])
def test_regimes(m, e, r, case):
    assert rn_regime(m, e, r) == case


def test_regime_anchor_and_errors():
    assert rn_regime(2, 1, 0.2, anchor="horizon") == 2
    assert rn_regime(1, 1, 0.5, anchor="horizon") == 5
    with pytest.raises(OnHorizon):
        rn_regime(1, 1, 1.0)
    with pytest.raises(OutOfBranch):
        rn_regime(2, 1, 2.0)


@pytest.mark.parametrize("model, r, expected", [
    (SpacetimeModel("coulomb_hydrogen"), 1.0, 2 / 3),
    (SpacetimeModel("spectrum_hydrogen", {"level": 2}), 0.5, 0.5),
    (SpacetimeModel("de_sitter", {"ell": 2}), 1.0, math.log(3.0)),
    (SpacetimeModel("minkowski"), 0.7, 0.7),
])
def test_tau_values(model, r, expected):
    assert spacetime_tau(model, r) == pytest.approx(expected, rel=1e-12)


def test_tau_out_of_branch():
    with pytest.raises(OutOfBranch):
        spacetime_tau(SpacetimeModel("schwarzschild", {"m": 1}), 1.5)
    with pytest.raises(OutOfBranch):
        spacetime_tau(RN(2, 1), 5.0, case=1)


@pytest.mark.parametrize("m, e", [(2, 1), (1, 1), (1, 2)])
def test_taylor_ratio(m, e):
    assert 0.99 <= origin_taylor_ratio(RN(m, e), 1e-3) <= 1.01


def test_taylor_wrong_case():
    with pytest.raises(WrongCase):
        origin_taylor_ratio(RN(2, 1), 5.0)
    with pytest.raises(WrongCase):
        origin_taylor_ratio(SpacetimeModel("minkowski"), 0.1)


def test_light_cones():
    rs = np.linspace(0, 2, 11)
    np.testing.assert_allclose(light_cone(SpacetimeModel("minkowski"), (0, 0), "future", rs), rs)
    np.testing.assert_allclose(light_cone(SpacetimeModel("coulomb_hydrogen"), (0, 0), "future", rs),
                               2 / 3 * rs ** 1.5, rtol=1e-14)
    np.testing.assert_allclose(light_cone(SpacetimeModel("spectrum_hydrogen", {"level": 3}), (0, 0), "future", rs),
                               3 * rs ** 2, rtol=1e-14)
    with pytest.raises(OutOfDomain):
        light_cone(SpacetimeModel("schwarzschild", {"m": 1}), (0, 1.0), "past", rs)


def test_cone_symmetry():
    # past and future mirror about t0 = 2
    for r, past, fut in light_cone_rows(SpacetimeModel("de_sitter", {"ell": 1}), (2.0, 0.3), np.linspace(0, 0.9, 19)):
        assert abs((2.0 - past) - (fut - 2.0)) <= 1e-15


def test_rn_branch_monotone():
    for case, (m, e, lo, hi) in {1: (2, 1, 1e-3, 0.26), 3: (2, 1, 3.8, 20), 4: (1, 1, 1e-3, 0.99),
                                 6: (1, 1, 1.01, 20), 7: (1, 2, 1e-3, 20)}.items():
        tau = spacetime_tau(RN(m, e), np.linspace(lo, hi, 1000), case)
        assert np.all(np.isfinite(tau)) and np.all(np.diff(tau) > 0), case


@pytest.mark.parametrize("n1, n2, value", [(1, 2, Fraction(7, 8)), (1, 3, Fraction(104, 27)), (2, 3, Fraction(95, 216))])
def test_uncertainty_values(n1, n2, value):
    assert uncertainty(n1, n2) == value


def test_uncertainty_equal_levels():
    with pytest.raises(EqualLevels):
        uncertainty(3, 3)


@given(st.integers(1, 200), st.integers(1, 200))
def test_uncertainty_symmetric(a, b):
    if a != b:
        assert uncertainty(a, b) == uncertainty(b, a)


def test_uncertainty_minimum():
    r2 = uncertainty_minimum(2)
    assert (r2["min"], r2["arg"], r2["matches_claim"]) == (Fraction(7, 8), (1, 2), True)
    r3 = uncertainty_minimum(3)
    assert (r3["min"], r3["arg"], r3["matches_claim"]) == (Fraction(95, 216), (2, 3), False)
    r50 = uncertainty_minimum(50)
    assert r50["min"] == Fraction(242583, 12005000) and r50["arg"] == (49, 50)
    assert r50["min"] == uncertainty(*r50["arg"])
