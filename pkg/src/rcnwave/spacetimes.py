"""Static spacetimes: tortoise coordinates, light cones, hydrogen uncertainty."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import integrate

from . import _closed
from .errors import EqualLevels, OnHorizon, OutOfBranch, OutOfDomain, WrongCase
from .geometry import RadialPotential

FAMILIES = ("minkowski", "schwarzschild", "reissner_nordstrom", "de_sitter",
            "coulomb_hydrogen", "spectrum_hydrogen")

_REQ = {"minkowski": ("c",), "schwarzschild": ("m", "c"), "reissner_nordstrom": ("m", "e"),
        "de_sitter": ("ell",), "coulomb_hydrogen": (), "spectrum_hydrogen": ("level",)}
_DEFAULTS = {"c": 1.0}
_HORIZON_RTOL = 1e-12


@dataclass(frozen=True)
class SpacetimeModel:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown spacetime family {self.family!r}")
        prm = {k: v for k, v in _DEFAULTS.items() if k in _REQ[self.family]}
        prm.update(self.params)
        for key in _REQ[self.family]:
            if key not in prm:
                raise ValueError(f"{self.family} requires {key!r}")
        for key, val in prm.items():
            if not (math.isfinite(val) and (val > 0 or (key == "e" and val >= 0))):
                raise ValueError(f"parameter {key} must be positive")
        if self.family == "spectrum_hydrogen" and int(prm["level"]) != prm["level"]:
            raise ValueError("spectrum_hydrogen level must be a positive integer")
        object.__setattr__(self, "params", prm)

    @property
    def horizons(self) -> Optional[tuple]:
        """(r_-, r_+) for RN with m^2 > e^2."""
        if self.family != "reissner_nordstrom":
            return None
        m, e = self.params["m"], self.params["e"]
        return _closed.rn_horizons(m, e) if m * m > e * e else None

    def potential(self, region: str = "outer", n: int = 3) -> RadialPotential:
        """The matching radial minorant, for quadrature cross-checks."""
        p, f = self.params, self.family
        if f == "minkowski":
            return RadialPotential.minkowski(n, c=p["c"])
        if f == "schwarzschild":
            return RadialPotential.schwarzschild(p["m"], p["c"], n)
        if f == "reissner_nordstrom":
            return RadialPotential.reissner_nordstrom(p["m"], p["e"], region=region, n=n)
        if f == "de_sitter":
            return RadialPotential.de_sitter(p["ell"], n)
        if f == "coulomb_hydrogen":
            return RadialPotential.coulomb(n)
        return RadialPotential.spectrum_hydrogen(p["level"], n)


def _near(a, b):
    return abs(a - b) <= _HORIZON_RTOL * max(abs(a), abs(b))


def rn_regime(m: float, e: float, r: float, anchor: str = "origin") -> int:
    """Branch index 1..7 of the Reissner-Nordstrom inner time table.

    Cases 1/2 and 4/5 cover the same radii; ``anchor="origin"`` picks the
    branch that vanishes at r = 0, ``anchor="horizon"`` the one written
    relative to the horizon.
    """
    if anchor not in ("origin", "horizon"):
        raise ValueError("anchor must be 'origin' or 'horizon'")
    if not (r > 0 and math.isfinite(r)):
        raise OutOfBranch(f"r must be positive, got {r}")
    if m * m < e * e:
        return 7
    if m * m == e * e:
        if _near(r, m):
            raise OnHorizon(f"r={r} is the degenerate horizon r=m")
        if r < m:
            return 4 if anchor == "origin" else 5
        return 6
    rm, rp = _closed.rn_horizons(m, e)
    if _near(r, rm) or _near(r, rp):
        raise OnHorizon(f"r={r} lies on a horizon ({rm}, {rp})")
    if r < rm:
        return 1 if anchor == "origin" else 2
    if r > rp:
        return 3
    raise OutOfBranch(f"r={r} lies between the horizons ({rm}, {rp}) where f < 0")


def _branch_ok(case, m, e, r):
    if case == 7:
        return m * m < e * e and r >= 0
    if case in (4, 5, 6):
        return m * m == e * e and (r < m if case != 6 else r > m) and (r >= 0)
    if m * m <= e * e:
        return False
    rm, rp = _closed.rn_horizons(m, e)
    return (0 <= r < rm) if case in (1, 2) else r > rp


def spacetime_tau(model: SpacetimeModel, r, case: Optional[int] = None, anchor: str = "origin"):
    """Cataloged tortoise coordinate at r (scalar or array)."""
    p, f = model.params, model.family
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if f == "reissner_nordstrom":
        m, e = p["m"], p["e"]
        if case is None:
            cases = {rn_regime(m, e, float(x), anchor) if x > 0 else
                     rn_regime(m, e, 1e-300, anchor) for x in arr}
            if len(cases) != 1:
                raise OutOfBranch("radii span several branches")
            case = cases.pop()
        if not all(_branch_ok(case, m, e, float(x)) for x in arr):
            raise OutOfBranch(f"radii outside branch {case}")
        out = _closed.reissner_nordstrom(case, arr, m, e)
    else:
        lo, hi, closed_lo = {
            "minkowski": (0.0, math.inf, True),
            "schwarzschild": (2.0 * p.get("m", 0.0), math.inf, False),
            "de_sitter": (0.0, p.get("ell", math.inf), True),
            "coulomb_hydrogen": (0.0, math.inf, True),
            "spectrum_hydrogen": (0.0, math.inf, True),
        }[f]
        ok = (arr > lo) | ((arr == lo) & closed_lo)
        if not np.all(ok & (arr < hi) & np.isfinite(arr)):
            raise OutOfBranch(f"radii outside ({lo}, {hi}) for {f}")
        if f == "minkowski":
            out = _closed.minkowski(arr, p["c"])
        elif f == "schwarzschild":
            out = _closed.schwarzschild(arr, p["m"], p["c"])
        elif f == "de_sitter":
            out = _closed.de_sitter(arr, p["ell"])
        elif f == "coulomb_hydrogen":
            out = _closed.coulomb(arr)
        else:
            out = _closed.spectrum_hydrogen(arr, p["level"])
    return float(out[0]) if np.ndim(r) == 0 else out


def origin_taylor_ratio(model: SpacetimeModel, r: float) -> float:
    """tau(r) 3 e^2 / r^3 with tau = int_0^r dr'/f by quadrature."""
    if model.family != "reissner_nordstrom":
        raise WrongCase("origin expansion applies to Reissner-Nordstrom only")
    m, e = model.params["m"], model.params["e"]
    case = rn_regime(m, e, r)
    if case not in (1, 4, 7):
        raise WrongCase(f"r={r} is in branch {case}, not an origin branch")
    if e == 0:
        raise WrongCase("the origin expansion needs e > 0")
    val, _ = integrate.quad(lambda x: x * x / (x * x - 2 * m * x + e * e), 0.0, r,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val * 3 * e * e / r ** 3


def light_cone(model: SpacetimeModel, vertex: tuple, direction: str, rs, anchor: str = "origin"):
    """t(r) = t0 -+ |tau(r) - tau(r0)| (minus for the past cone)."""
    if direction not in ("past", "future"):
        raise ValueError("direction must be 'past' or 'future'")
    t0, r0 = (float(v) for v in vertex)
    rs = np.asarray(rs, dtype=float)
    try:
        if model.family == "reissner_nordstrom":
            case = rn_regime(model.params["m"], model.params["e"], r0 if r0 > 0 else 1e-300, anchor)
            tau0 = spacetime_tau(model, r0, case)
            tau = spacetime_tau(model, rs, case)
        else:
            tau0 = spacetime_tau(model, r0)
            tau = spacetime_tau(model, rs)
    except (OutOfBranch, OnHorizon) as exc:
        raise OutOfDomain(str(exc)) from exc
    gap = np.abs(np.asarray(tau) - tau0)
    return t0 - gap if direction == "past" else t0 + gap


def light_cone_rows(model: SpacetimeModel, vertex: tuple, rs):
    past = light_cone(model, vertex, "past", rs)
    fut = light_cone(model, vertex, "future", rs)
    return [(float(r), float(a), float(b)) for r, a, b in zip(np.asarray(rs, dtype=float), past, fut)]


# hydrogen uncertainty --------------------------------------------------------

def uncertainty(n1: int, n2: int) -> Fraction:
    """(1/6) |1/n1^2 - 1/n2^2| |n2^3 - n1^3| exactly."""
    if int(n1) != n1 or int(n2) != n2 or n1 < 1 or n2 < 1:
        raise ValueError("levels must be positive integers")
    if n1 == n2:
        raise EqualLevels(f"levels are equal ({n1})")
    n1, n2 = int(n1), int(n2)
    return Fraction(1, 6) * abs(Fraction(1, n1 * n1) - Fraction(1, n2 * n2)) * abs(n2 ** 3 - n1 ** 3)


def uncertainty_minimum(N: int) -> dict:
    """Exact minimum over 1 <= n1 < n2 <= N.

    ``matches_claim`` reports whether the minimum is 7/8 at (1, 2); it is not
    for N >= 3, since the value falls with the levels.
    """
    if int(N) != N or N < 2:
        raise ValueError("N must be an integer >= 2")
    best, arg = None, None
    for a in range(1, int(N)):
        for b in range(a + 1, int(N) + 1):
            v = uncertainty(a, b)
            if best is None or v < best:
                best, arg = v, (a, b)
    return {"min": best, "arg": arg, "matches_claim": bool(best == Fraction(7, 8) and arg == (1, 2))}


def fraction_json(v: Fraction) -> dict:
    return {"num": v.numerator, "den": v.denominator}
