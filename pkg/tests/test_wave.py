import math

import numpy as np
import pytest

from rcnwave import (
    ConeSpec, RadialPotential, WaveScenario, build_grid, cfl_dt, energy_constant, energy_slice,
    excision_check, gaussian_pulse, run_wave, solve_dirichlet, verify_cone, verify_silo,
)
from rcnwave.errors import IndefiniteForm

MINK1 = RadialPotential.minkowski(1)


def dalembert_error(cells, t_end=0.25):
    f = lambda x: np.exp(-((x - 2.0) / 0.2) ** 2)
    sc = WaveScenario(MINK1, 0.0, 4.0, cells, t_end, coordinate="r", u0=f, snapshot_every=10 ** 9)
    tr = run_wave(sc)
    x, u = tr.grid.x, tr.states[-1].u
    exact = 0.5 * (f(x - t_end) + f(x + t_end))
    h = x[1] - x[0]
    return math.sqrt(h * np.sum((u - exact) ** 2))


def test_dalembert_order():
    e = [dalembert_error(c) for c in (200, 400, 800)]
    orders = [math.log2(e[0] / e[1]), math.log2(e[1] / e[2])]
    assert all(1.8 <= o <= 2.2 for o in orders), orders


def test_zero_data_stays_zero():
    tr = run_wave(WaveScenario(RadialPotential.power_singular(1, 0.5, 3), 0.01, 1.0, 100, 0.5, coordinate="r"))
    assert all(np.all(s.u == 0) for s in tr.states)
    assert energy_slice(tr, tr.states[-1]).E_total == 0.0


def test_cfl_examples():
    assert cfl_dt(build_grid(RadialPotential.minkowski(3), "r", 0.0, 1.0, 100)) == pytest.approx(0.005)
    g = build_grid(RadialPotential.schwarzschild(1.0, 1.0), "tau", 0.0, 20.0, 1000)
    assert cfl_dt(g) == pytest.approx(0.01)
    p = RadialPotential.power_singular(1, 0.5, 3)
    g = build_grid(p, "r", 0.1, 1.0, 90, "schrodinger")
    r = g.r
    dtau = (r[1:] ** 2 - r[:-1] ** 2) / (2 * 0.5)
    speed = np.maximum(1.0, g.speed)
    assert cfl_dt(g) == pytest.approx(0.5 * np.min(dtau / speed), rel=1e-10)


def test_standing_wave_energy():
    sc = WaveScenario(MINK1, 0.0, 1.0, 2000, 0.0, coordinate="r", u0=lambda r: np.sin(np.pi * r))
    tr = run_wave(sc)
    assert energy_slice(tr, tr.states[0]).E_total == pytest.approx(np.pi ** 2 / 4, rel=1e-4)


def test_cone_tip_slice_is_empty():
    sc = WaveScenario(MINK1, 0.0, 4.0, 400, 0.0, coordinate="r", u0=gaussian_pulse(2.0, 1.0))
    tr = run_wave(sc)
    cone = ConeSpec(anchor=2.0, tau0=1.0, delta_hat=0.0)
    st = tr.states[0]
    tip = type(st)(cone.T_hat, st.u, st.ut)
    assert energy_slice(tr, tip, cone).E_total == 0.0
    assert energy_slice(tr, st, cone).E_total > 0.0


def drift(sc):
    e = [r.E_total for r in run_wave(sc).energies]
    return max(abs(x - e[0]) for x in e) / e[0]


def test_energy_drift_unsourced():
    # the plain discrete energy oscillates at O((omega dt)^2), so the data must be well resolved
    flat = WaveScenario(MINK1, 0.0, 12.0, 1200, 2.0, coordinate="r", u0=gaussian_pulse(6.0, 6.0))
    assert drift(flat) <= 1e-4
    sch = WaveScenario(RadialPotential.schwarzschild(1.0, 1.0), 0.0, 40.0, 4000, 20.0,
                       coordinate="tau", u0=gaussian_pulse(10.0, 6.0))
    assert drift(sch) <= 1e-4


def _sourced(cells):
    shape = gaussian_pulse(2.0, 1.0)
    return WaveScenario(RadialPotential.minkowski(3), 0.0, 4.0, cells, 2.0, coordinate="r",
                        u0=gaussian_pulse(2.0, 1.0), source=lambda t, r: np.cos(3 * t) * shape(r))


def test_energy_inequality_stable_under_refinement():
    c = [energy_constant(run_wave(_sourced(n))) for n in (200, 400, 800)]
    assert c[1] <= 1.1 * c[0] and c[2] <= 1.1 * c[1]


def test_cone_minkowski_and_shrunken():
    sc = WaveScenario(MINK1, 0.0, 10.0, 1000, 3.0, coordinate="r", u0=gaussian_pulse(5.0, 1.0))
    tr = run_wave(sc)
    assert verify_cone(tr)["pass"]
    assert not verify_cone(tr, speed=0.5)["pass"]


def test_cone_power_singular():
    p = RadialPotential.power_singular(1, 0.5, 3)
    # unit tau-speed bounds the flat speed q^{-1/2} only where q >= 1, i.e. r <= beta
    sc = WaveScenario(p, 0.0, 0.5, 500, 0.1, coordinate="r", u0=gaussian_pulse(0.2, 0.2))
    assert verify_cone(run_wave(sc))["pass"]


def test_silo_schwarzschild():
    sch = RadialPotential.schwarzschild(1.0, 1.0)
    sc = WaveScenario(sch, 0.0, 40.0, 4000, 20.0, coordinate="tau", u0=gaussian_pulse(6.0, 2.0))
    rep = verify_silo(run_wave(sc))
    assert rep["pass"] and rep["distance"]["hi"] > 20.0


def test_silo_touching_pulse_fails():
    sch = RadialPotential.schwarzschild(1.0, 1.0)
    sc = WaveScenario(sch, 0.0, 10.0, 500, 1.0, coordinate="tau", u0=gaussian_pulse(0.5, 1.0))
    assert not verify_silo(run_wave(sc))["pass"]


def test_excision_singular_center():
    p = RadialPotential.power_singular(1, 0.5, 3)
    # the pulse focuses through the center near t = 0.6 and has left it by t = 1
    sc = WaveScenario(p, 0.0, 2.0, 800, 1.0, coordinate="tau", u0=gaussian_pulse(0.6, 0.4),
                      inner="excised_cutoff", r_cut_inner=0.02, profile_coordinate="r")
    assert excision_check(sc)["pass"]


def test_dirichlet_poisson_order():
    errs = []
    for cells in (100, 200):
        res = solve_dirichlet(MINK1, ("r", 0.0, 1.0, cells), lambda r: np.pi ** 2 * np.sin(np.pi * r))
        assert res["residual"] <= 1e-10
        errs.append(np.max(np.abs(res["u"] - np.sin(np.pi * res["r"]))))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_dirichlet_zero_and_positive_form():
    res = solve_dirichlet(MINK1, ("r", 0.0, 1.0, 50), lambda r: 0.0 * r)
    assert np.all(res["u"] == 0)
    p = RadialPotential.power_singular(1, 0.1, 3)
    res = solve_dirichlet(p, ("r", 0.01, 0.5, 200), lambda r: np.sin(np.pi * r))
    assert res["form_value"] > 0 and res["residual"] <= 1e-10


def test_dirichlet_indefinite():
    p = RadialPotential("minkowski", {}, 1, v_plus=lambda r: -1e3 + 0 * r)
    with pytest.raises(IndefiniteForm):
        solve_dirichlet(p, ("r", 0.0, 1.0, 100), lambda r: 1.0 + 0 * r)
