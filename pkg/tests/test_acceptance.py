"""Acceptance criteria 1-13, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
without ``-s``) or directly with ``python tests/test_acceptance.py``.
"""
import math
import os
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

sys.path.insert(0, os.path.dirname(__file__))

from rcnwave import (  # noqa: E402
    RadialPotential, RcnWindow, SpacetimeModel, WaveScenario, closed_form_tau, energy_constant,
    excision_check, falsify_nonnegativity, falsify_positivity, gaussian_pulse, hardy_check,
    necessary_product, origin_taylor_ratio, positivity_check, power_profile, run_wave,
    self_adjointness_feasible, spacetime_tau, tau_many, uncertainty, uncertainty_minimum,
    uniform_delta_sweep, verify_cone, verify_silo,
)
from rcnwave.forms import alpha_boundary  # noqa: E402
from rcnwave.rcn import infinity_layer  # noqa: E402

import catalog  # noqa: E402


def _rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - b) / np.abs(b)))


# criteria ---------------------------------------------------------------------------------

def c1():
    t0 = time.perf_counter()
    errs = {}
    sch = RadialPotential.schwarzschild(1.0, 1.0)
    rs = np.linspace(2 + 1e-6, 4.0, 200)
    errs["schwarzschild"] = _rel(tau_many(sch, 4.0, rs[:-1]), closed_form_tau(sch, 4.0, rs[:-1]))
    ds = RadialPotential.de_sitter(1.0)
    rs = np.linspace(0.0, 1 - 1e-6, 201)[1:]
    errs["de_sitter"] = _rel(tau_many(ds, 0.0, rs), closed_form_tau(ds, 0.0, rs))
    rs = np.geomspace(1e-6, 10.0, 200)
    errs["hydrogen"] = _rel(tau_many(RadialPotential.coulomb(), 0.0, rs), 2 / 3 * rs ** 1.5)
    # origin branches from r = 0; horizon branches against a finite end of the branch
    branches = {1: (2, 1, 1e-2, 0.26), 2: (2, 1, 1e-2, 0.26), 3: (2, 1, 3.8, 20), 4: (1, 1, 1e-2, 0.99),
                5: (1, 1, 1e-2, 0.99), 6: (1, 1, 1.01, 20), 7: (1, 2, 1e-2, 20)}
    for case, (m, e, lo, hi) in branches.items():
        model = SpacetimeModel("reissner_nordstrom", {"m": m, "e": e})
        f = lambda x: x * x / (x * x - 2 * m * x + e * e)
        rs = np.geomspace(lo, hi, 201)
        base, pts = (rs[-1], rs[:-1]) if case in (3, 6) else (0.0, rs[1:])
        quad = np.array([integrate.quad(f, base, r, epsabs=0, epsrel=1e-13, limit=200)[0] for r in pts])
        closed = spacetime_tau(model, pts, case) - spacetime_tau(model, base, case)
        errs[f"rn{case}"] = _rel(closed, quad)
    dt = time.perf_counter() - t0
    worst = max(errs, key=errs.get)
    return max(errs.values()) <= 1e-8 and dt < 10, f"worst {worst} {errs[worst]:.2e}, {dt:.2f}s"


def c2():
    ok = []
    for n, beta in ((3, 0.1), (3, 0.2), (1, 0.4)):
        w = RcnWindow(RadialPotential.power_singular(1, beta, n), 0.0, (0.0, 0.5))
        ok.append(abs(necessary_product(w).sup - n * beta / 8) <= 1e-6)
    c = dict((k, catalog.by_label(k)[1].feasible) for k in (
        "ps a=1 b=0.1 n=3", "ps a=1 b=0.2 n=3", "ps a=2 b=1 n=3", "log_singular d=0.5 n=3 depth",
        "power_infinity layer r=10", "power_infinity layer r=100", "power_infinity layer r=1000"))
    expect = {"ps a=1 b=0.2 n=3": False, "ps a=2 b=1 n=3": False}
    ok.extend(c[k] == expect.get(k, True) for k in c)
    return all(ok), f"products and {len(c)} verdicts as expected: {all(ok)}"


def _sweep_reports():
    sch = RadialPotential.schwarzschild(1.0, 1.0)
    ds = RadialPotential.de_sitter(1.0)
    ps = RadialPotential.power_singular(1, 0.3, 3)
    return [
        uniform_delta_sweep(sch, [infinity_layer(sch, 2 + 2.0 ** -k, 2 + 2.0 ** (-k + 1)) for k in range(4, 11)], 0.99),
        uniform_delta_sweep(ds, [infinity_layer(ds, 1 - 2.0 ** (-k + 1), 1 - 2.0 ** -k) for k in range(4, 11)], 0.99),
        uniform_delta_sweep(ps, [RcnWindow(ps, 0.0, (0.0, 2.0 ** -k)) for k in range(1, 6)], 0.99),
    ]


def c3():
    sups = [c.necessary_sup for _, _, c in catalog.certificates() if c.feasible]
    for rep in _sweep_reports():
        sups += [row["necessary_sup"] for row in rep["windows"] if row["feasible"]]
    bad = [s for s in sups if not s < 1 / 16]
    return not bad, f"{len(sups)} feasible certificates, max necessary_sup {max(sups):.4f}, exceptions {len(bad)}"


def c4():
    cases = [
        (lambda t: t * (1 - t), lambda t: 1 - 2 * t, 1 / 3, 4 / 3),
        (lambda t: t, lambda t: np.ones_like(t), 1.0, 4.0),
        (*power_profile(0.51), 50.0, 52.02),
    ]
    ok = True
    for f, df, lhs, rhs in cases:
        r = hardy_check(f, 1.0, df)
        ok &= r["holds"] and abs(r["lhs"] - lhs) <= 1e-6 * lhs and abs(r["rhs"] - rhs) <= 1e-6 * rhs
    f, df = power_profile(0.505)
    r = hardy_check(f, 1.0, df)
    ratio = r["lhs"] / r["rhs"]
    return bool(ok and ratio > 0.9), f"examples ok {bool(ok)}, ratio at s=0.505 {ratio:.4f}"


def c5():
    windows = 0
    fails = 0
    for k, (name, w, cert) in enumerate(catalog.certificates()):
        if not cert.feasible or w.depth is not None:
            continue  # depth windows lie below double range in r
        windows += 1
        for phi in catalog.random_window_bumps(w, 50, seed=k):
            fails += not positivity_check(w.potential, phi, w, cert.delta)["holds"]
    p = RadialPotential.power_singular(1, 0.4, 1)
    rep = falsify_positivity(p, RcnWindow(p, 0.0, (0.0, 0.5)), 0.99, trials=1000)
    detail = (f"positivity {windows} windows x 50 bumps, failures {fails}; falsifier "
              f"found={rep.found} after {rep.trials} trials, worst ratio {rep.worst_ratio:.4f}")
    return fails == 0 and rep.found, detail


def c6():
    ok = self_adjointness_feasible(4, 0)["feasible"] and not self_adjointness_feasible(3, 0)["feasible"]
    for n in (5, 6, 7):
        a = alpha_boundary(n)
        ok &= a == Fraction((n - 2) ** 2, 4) - 1
        ok &= self_adjointness_feasible(n, a)["feasible"]
        ok &= not self_adjointness_feasible(n, float(a) + 1e-9)["feasible"]
    thr = (5 - 2) ** 2 / 4
    found = {s: falsify_nonnegativity(5, s * thr, 1000) for s in (0.9, 1.0, 1.1)}
    ok &= not found[0.9].found and not found[1.0].found and found[1.1].found
    return bool(ok), ", ".join(f"{s}x: found={r.found} ({r.trials} trials)" for s, r in found.items())


def c7():
    t0 = time.perf_counter()
    f = lambda x: np.exp(-((x - 2.0) / 0.2) ** 2)
    errs = []
    for cells in (200, 400, 800):
        tr = run_wave(WaveScenario(RadialPotential.minkowski(1), 0.0, 4.0, cells, 0.25, coordinate="r",
                                   u0=f, snapshot_every=10 ** 9))
        x, u = tr.grid.x, tr.states[-1].u
        errs.append(math.sqrt((x[1] - x[0]) * np.sum((u - 0.5 * (f(x - 0.25) + f(x + 0.25))) ** 2)))
    orders = [math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2])]
    dt = time.perf_counter() - t0
    return all(1.8 <= o <= 2.2 for o in orders) and dt < 30, f"orders {orders[0]:.3f}, {orders[1]:.3f}, {dt:.2f}s"


def c8():
    drifts = []
    for sc in (
        WaveScenario(RadialPotential.minkowski(1), 0.0, 12.0, 1200, 2.0, coordinate="r", u0=gaussian_pulse(6.0, 6.0)),
        WaveScenario(RadialPotential.schwarzschild(1.0, 1.0), 0.0, 40.0, 4000, 20.0, coordinate="tau",
                     u0=gaussian_pulse(10.0, 6.0)),
    ):
        e = [r.E_total for r in run_wave(sc).energies]
        drifts.append(max(abs(x - e[0]) for x in e) / e[0])
    shape = gaussian_pulse(2.0, 1.0)
    consts = [energy_constant(run_wave(WaveScenario(
        RadialPotential.minkowski(3), 0.0, 4.0, n, 2.0, coordinate="r", u0=gaussian_pulse(2.0, 1.0),
        source=lambda t, r: np.cos(3 * t) * shape(r)))) for n in (400, 800)]
    ok = max(drifts) <= 1e-4 and consts[1] <= 1.1 * consts[0]
    return ok, f"drifts {drifts[0]:.1e}, {drifts[1]:.1e}; C1 {consts[0]:.4f} -> {consts[1]:.4f}"


def c9():
    flat = run_wave(WaveScenario(RadialPotential.minkowski(1), 0.0, 10.0, 1000, 3.0, coordinate="r",
                                 u0=gaussian_pulse(5.0, 1.0)))
    ps = run_wave(WaveScenario(RadialPotential.power_singular(1, 0.5, 3), 0.0, 0.5, 500, 0.1, coordinate="r",
                               u0=gaussian_pulse(0.2, 0.2)))
    a, b, half = verify_cone(flat), verify_cone(ps), verify_cone(flat, speed=0.5)
    ok = a["pass"] and b["pass"] and not half["pass"]
    return ok, f"minkowski {a['pass']}, power_singular {b['pass']}, half-speed cone fails {not half['pass']}"


def c10():
    out = []
    ok = True
    for p in (RadialPotential.schwarzschild(1.0, 1.0), RadialPotential.de_sitter(1.0)):
        t0 = time.perf_counter()
        tr = run_wave(WaveScenario(p, 0.0, 40.0, 4000, 20.0, coordinate="tau", u0=gaussian_pulse(6.0, 2.0)))
        rep = verify_silo(tr)
        dt = time.perf_counter() - t0
        # large-tau boundary band: two cells at the far end
        far = max(row["hi"] for row in rep["trace"])
        good = rep["pass"] and far <= 1e-8 * tr.u0_peak and dt < 60
        ok &= bool(good)
        out.append(f"{p.kind} far-band max {far / tr.u0_peak:.1e} of peak, {dt:.1f}s")
    return ok, "; ".join(out)


def c11():
    rep = uncertainty_minimum(50)
    ok = uncertainty(1, 2) == Fraction(7, 8)
    ok &= rep["min"] == uncertainty(*rep["arg"])
    ok &= rep["matches_claim"] == (rep["min"] == Fraction(7, 8) and rep["arg"] == (1, 2))
    ok &= all(uncertainty(a, b) >= rep["min"] for a in range(1, 50) for b in range(a + 1, 51))
    return bool(ok), f"min {rep['min']} at {rep['arg']}, matches_claim={rep['matches_claim']}"


def c12():
    vals = {}
    for m, e in ((2, 1), (1, 1), (1, 2)):
        vals[(m, e)] = origin_taylor_ratio(SpacetimeModel("reissner_nordstrom", {"m": m, "e": e}), 1e-3)
    return all(0.99 <= v <= 1.01 for v in vals.values()), ", ".join(f"{k}: {v:.5f}" for k, v in vals.items())


def c13():
    p = RadialPotential.power_singular(1, 0.5, 3)
    sc = WaveScenario(p, 0.0, 2.0, 800, 1.0, coordinate="tau", u0=gaussian_pulse(0.6, 0.4),
                      inner="excised_cutoff", r_cut_inner=0.02, profile_coordinate="r")
    rep = excision_check(sc)
    return rep["pass"], f"relative L2 change {rep['worst_value']:.2e}"


CRITERIA = {1: ("closed-form tau agreement", c1), 2: ("power-law thresholds", c2),
            3: ("necessary product below 1/16", c3), 4: ("Hardy suite", c4),
            5: ("positivity and falsification", c5), 6: ("self-adjointness and nonnegativity", c6),
            7: ("wave convergence order", c7), 8: ("energy drift and inequality", c8),
            9: ("finite propagation", c9), 10: ("horizon silo", c10), 11: ("uncertainty", c11),
            12: ("charged origin expansion", c12), 13: ("excision insensitivity", c13)}


def _line(n):
    name, fn = CRITERIA[n]
    try:
        ok, detail = fn()
    except Exception as exc:  # report, then fail the test
        ok, detail = False, f"error {exc!r}"
    return bool(ok), f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {name} ({detail})"


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, line = _line(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_line(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
