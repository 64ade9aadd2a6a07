"""Shared certification catalog: every window the suite certifies."""
import functools

import numpy as np

from rcnwave import RadialPotential, RcnWindow, SearchConfig, certify_window
from rcnwave.rcn import example4_layer, infinity_layer, log_singular_window

CFG = SearchConfig()


def _entries():
    ps = lambda a, b, n=3: RadialPotential.power_singular(a, b, n)
    out = [
        ("ps a=1 b=0.1 n=3", RcnWindow(ps(1, 0.1), 0.0, (0.0, 0.5))),
        ("ps a=1 b=0.1 n=3 small", RcnWindow(ps(1, 0.1), 0.0, (0.0, 0.01))),
        ("ps a=1 b=0.2 n=3", RcnWindow(ps(1, 0.2), 0.0, (0.0, 0.5))),
        ("ps a=2 b=1 n=3", RcnWindow(ps(2, 1.0), 0.0, (0.0, 0.5))),
        ("ps a=0.5 b=0.05 n=3", RcnWindow(ps(0.5, 0.05), 0.0, (0.0, 0.5))),
        ("ps a=1 b=0.4 n=1", RcnWindow(ps(1, 0.4, 1), 0.0, (0.0, 0.5))),
        ("minkowski n=3", RcnWindow(RadialPotential.minkowski(3), 0.0, (0.0, 0.01))),
        ("minkowski n=3 unit", RcnWindow(RadialPotential.minkowski(3), 0.0, (0.0, 1.0))),
        ("log_singular d=0.5 n=3 depth", log_singular_window(RadialPotential.log_singular(0.5, 3), 3000.0)),
        ("log_singular d=0.5 n=1", RcnWindow(RadialPotential.log_singular(0.5, 1), 0.0, (0.0, 1e-12))),
    ]
    pi = RadialPotential.power_infinity(1.0, 1.0, 3)
    for r in (10.0, 100.0, 1000.0):
        out.append((f"power_infinity layer r={r:g}", example4_layer(pi, r, 0.05)))
    sch = RadialPotential.schwarzschild(1.0, 1.0)
    out.append(("schwarzschild horizon layer", infinity_layer(sch, 2.0, 2.05)))
    ds = RadialPotential.de_sitter(1.0)
    out.append(("de_sitter horizon layer", infinity_layer(ds, 0.95, 1.0)))
    return out


@functools.lru_cache(maxsize=None)
def certificates():
    """(label, window, certificate) for the whole catalog, computed once per session."""
    return tuple((name, w, certify_window(w, CFG)) for name, w in _entries())


def by_label(label):
    for name, w, cert in certificates():
        if name == label:
            return w, cert
    raise KeyError(label)


def random_window_bumps(w, count, seed):
    """Random polynomial bumps strictly inside a certified window."""
    from rcnwave.forms import random_bumps

    lo, hi = w.interval
    lo = max(lo, w.potential.domain[0])
    return random_bumps(lo, hi, count, np.random.default_rng(seed))
