"""Inner time metric, area density and dual potential for radial potentials.

For a spherically symmetric minorant q(r) on a radial domain the inner time is

    tau(r) = int_{r_ref}^{r} q^{-1/2} g_rr^{1/2} dr,

with g_rr = 1 in flat space and g_rr = 1/f for the static black hole slices.
The area density is sigma = r^{(n-1)/2} (normalising constant fixed to 1) and
w = q^{3/4} sigma tau.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator

from . import _closed
from .errors import NonIntegrableAtEndpoint, OutOfDomain, OutOfRange, ZeroW

KINDS = ("minkowski", "power_singular", "log_singular", "power_infinity",
         "schwarzschild", "reissner_nordstrom", "de_sitter", "coulomb",
         "spectrum_hydrogen", "custom_table")

MARKERS = ("singularity_at_inner", "horizon_at_inner", "horizon_at_outer",
           "unbounded_outer")

_REQUIRED = {
    "minkowski": (),
    "power_singular": ("alpha", "beta"),
    "log_singular": ("delta",),
    "power_infinity": ("alpha", "beta"),
    "schwarzschild": ("m",),
    "reissner_nordstrom": ("m", "e"),
    "de_sitter": ("ell",),
    "coulomb": (),
    "spectrum_hydrogen": ("level",),
    "custom_table": (),
}

_QUAD_RTOL = 1e-12
_MAX_TAIL = 64


def _natural_domain(kind, prm, region):
    """Default (lo, hi, markers) for a kind."""
    inf = math.inf
    if kind in ("minkowski",):
        return 0.0, inf, {"unbounded_outer"}
    if kind in ("power_singular", "coulomb", "spectrum_hydrogen"):
        return 0.0, inf, {"singularity_at_inner", "unbounded_outer"}
    if kind == "log_singular":
        return 0.0, 0.5, {"singularity_at_inner"}
    if kind == "power_infinity":
        return 1.0, inf, {"unbounded_outer"}
    if kind == "schwarzschild":
        return 2.0 * prm["m"], inf, {"horizon_at_inner", "unbounded_outer"}
    if kind == "de_sitter":
        return 0.0, prm["ell"], {"horizon_at_outer"}
    if kind == "reissner_nordstrom":
        m, e = prm["m"], prm["e"]
        if m * m < e * e:
            return 0.0, inf, {"singularity_at_inner", "unbounded_outer"}
        if m * m == e * e:
            rm = rp = m
        else:
            rm, rp = _closed.rn_horizons(m, e)
        if region == "inner":
            return 0.0, rm, {"singularity_at_inner", "horizon_at_outer"}
        return rp, inf, {"horizon_at_inner", "unbounded_outer"}
    raise ValueError(f"no natural domain for kind {kind!r}")


@dataclass(frozen=True, eq=False)
class RadialPotential:
    """Spherically symmetric potential specification.

    ``params`` holds the kind's coefficients; ``table`` holds (r, q) samples
    for ``custom_table``. ``v_minus`` overrides the negative part when the
    ``v_minus_equals_q`` flag is not set.
    """

    kind: str
    params: dict = field(default_factory=dict)
    dimension: int = 3
    v_plus: Optional[Callable] = None
    v_minus_equals_q: bool = False
    v_minus: Optional[Callable] = None
    domain: tuple = (None, None)
    markers: frozenset = frozenset()
    table: Optional[tuple] = None
    region: str = "outer"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError("dimension must be an integer >= 1")
        prm = dict(self.params)
        for key in _REQUIRED[self.kind]:
            if key not in prm:
                raise ValueError(f"{self.kind} requires parameter {key!r}")
        prm.setdefault("c", 1.0)
        for key, val in prm.items():
            if not math.isfinite(val):
                raise ValueError(f"parameter {key} must be finite")
            if key in ("beta", "delta", "m", "ell", "c", "level") and val <= 0:
                raise ValueError(f"parameter {key} must be positive")
            if key in ("alpha", "e") and val < 0:
                raise ValueError(f"parameter {key} must be nonnegative")
        if self.kind == "power_singular" and prm["alpha"] <= 0:
            raise ValueError("power_singular needs alpha > 0")
        object.__setattr__(self, "params", prm)

        if self.kind == "custom_table":
            if self.table is None:
                raise ValueError("custom_table needs (r, q) samples")
            rs = np.asarray(self.table[0], dtype=float)
            qs = np.asarray(self.table[1], dtype=float)
            if rs.ndim != 1 or rs.shape != qs.shape or rs.size < 4:
                raise ValueError("custom_table needs at least 4 matching samples")
            if np.any(np.diff(rs) <= 0):
                raise ValueError("custom_table radii must be strictly increasing")
            if np.any(qs <= 0) or not np.all(np.isfinite(qs)):
                raise ValueError("custom_table samples must be strictly positive")
            object.__setattr__(self, "table", (rs, qs))
            object.__setattr__(self, "_interp", PchipInterpolator(rs, qs, extrapolate=False))
            lo, hi, mk = float(rs[0]), float(rs[-1]), set()
        else:
            lo, hi, mk = _natural_domain(self.kind, prm, self.region)

        dlo, dhi = self.domain
        dlo = lo if dlo is None else float(dlo)
        dhi = hi if dhi is None else float(dhi)
        if dlo < lo or dhi > hi or dlo >= dhi:
            raise OutOfDomain(f"domain ({dlo}, {dhi}) outside natural domain ({lo}, {hi})")
        markers = set(self.markers) if self.markers else set(mk)
        bad = markers - set(MARKERS)
        if bad:
            raise ValueError(f"unknown domain markers {sorted(bad)}")
        # markers only survive when the domain still reaches the marked end
        if dlo > lo:
            markers -= {"singularity_at_inner", "horizon_at_inner"}
        if dhi < hi:
            markers -= {"horizon_at_outer", "unbounded_outer"}
        object.__setattr__(self, "domain", (dlo, dhi))
        object.__setattr__(self, "markers", frozenset(markers))

    # constructors --------------------------------------------------------

    @classmethod
    def minkowski(cls, n=3, c=1.0, **kw):
        return cls("minkowski", {"c": c}, n, **kw)

    @classmethod
    def power_singular(cls, alpha, beta, n=3, **kw):
        return cls("power_singular", {"alpha": alpha, "beta": beta}, n, **kw)

    @classmethod
    def log_singular(cls, delta, n=3, **kw):
        return cls("log_singular", {"delta": delta}, n, **kw)

    @classmethod
    def power_infinity(cls, alpha, beta, n=3, **kw):
        return cls("power_infinity", {"alpha": alpha, "beta": beta}, n, **kw)

    @classmethod
    def schwarzschild(cls, m=1.0, c=1.0, n=3, **kw):
        return cls("schwarzschild", {"m": m, "c": c}, n, **kw)

    @classmethod
    def reissner_nordstrom(cls, m, e, region="outer", n=3, **kw):
        return cls("reissner_nordstrom", {"m": m, "e": e}, n, region=region, **kw)

    @classmethod
    def de_sitter(cls, ell=1.0, n=3, **kw):
        return cls("de_sitter", {"ell": ell}, n, **kw)

    @classmethod
    def coulomb(cls, n=3, **kw):
        return cls("coulomb", {}, n, **kw)

    @classmethod
    def spectrum_hydrogen(cls, level, n=3, **kw):
        return cls("spectrum_hydrogen", {"level": level}, n, **kw)

    @classmethod
    def custom_table(cls, r, q, n=3, **kw):
        return cls("custom_table", {}, n, table=(r, q), **kw)

    # pointwise data ------------------------------------------------------

    def q(self, r):
        """Minorant q(r); accepts floats or arrays."""
        p, k = self.params, self.kind
        r = np.asarray(r, dtype=float)
        if k == "minkowski":
            return p["c"] ** 2 + 0.0 * r
        if k == "power_singular":
            return p["beta"] ** 2 * r ** (-2.0 * p["alpha"])
        if k == "log_singular":
            return r ** -2.0 * (-np.log(r)) ** (-p["delta"])
        if k == "power_infinity":
            return p["beta"] ** 2 * r ** (2.0 * p["alpha"])
        if k == "schwarzschild":
            return p["c"] ** 2 * (r - 2.0 * p["m"]) / r
        if k == "reissner_nordstrom":
            return self._rn_f(r)
        if k == "de_sitter":
            x = r / p["ell"]
            return (1.0 - x) * (1.0 + x)
        if k == "coulomb":
            return 1.0 / r
        if k == "spectrum_hydrogen":
            return 1.0 / (4.0 * p["level"] ** 2 * r * r)
        return self._interp(r)

    def _rn_f(self, r):
        m, e = self.params["m"], self.params["e"]
        if m * m > e * e:
            rm, rp = _closed.rn_horizons(m, e)
            return (r - rp) * (r - rm) / (r * r)
        if m * m == e * e:
            return (r - m) ** 2 / (r * r)
        return ((r - m) ** 2 + (e * e - m * m)) / (r * r)

    def dq(self, r):
        """Radial derivative of q for catalog kinds."""
        p, k = self.params, self.kind
        r = np.asarray(r, dtype=float)
        if k == "minkowski":
            return 0.0 * r
        if k == "power_singular":
            return -2.0 * p["alpha"] * self.q(r) / r
        if k == "log_singular":
            L = -np.log(r)
            return self.q(r) * (-2.0 / r + p["delta"] / (r * L))
        if k == "power_infinity":
            return 2.0 * p["alpha"] * self.q(r) / r
        if k == "schwarzschild":
            return p["c"] ** 2 * 2.0 * p["m"] / (r * r)
        if k == "reissner_nordstrom":
            return 2.0 * p["m"] / r ** 2 - 2.0 * p["e"] ** 2 / r ** 3
        if k == "de_sitter":
            return -2.0 * r / p["ell"] ** 2
        if k == "coulomb":
            return -1.0 / (r * r)
        if k == "spectrum_hydrogen":
            return -2.0 * self.q(r) / r
        return self._interp.derivative()(r)

    def g_rr(self, r):
        """Radial component of the spatial metric."""
        r = np.asarray(r, dtype=float)
        if self.kind == "schwarzschild":
            return r / (r - 2.0 * self.params["m"])
        if self.kind in ("reissner_nordstrom", "de_sitter"):
            return 1.0 / self.q(r)
        return 1.0 + 0.0 * r

    def tau_density(self, r):
        """d tau / d r = q^{-1/2} g_rr^{1/2}."""
        if self.kind == "schwarzschild":
            r = np.asarray(r, dtype=float)
            return r / ((r - 2.0 * self.params["m"]) * self.params["c"])
        if self.kind in ("reissner_nordstrom", "de_sitter"):
            return 1.0 / self.q(r)
        return self.q(r) ** -0.5

    def sigma(self, r):
        return np.asarray(r, dtype=float) ** ((self.dimension - 1) / 2.0)

    def sigma2(self, r):
        return np.asarray(r, dtype=float) ** (self.dimension - 1)

    def v_minus_of(self, r):
        if self.v_minus_equals_q:
            return self.q(r)
        if self.v_minus is not None:
            return np.asarray(self.v_minus(np.asarray(r, dtype=float)), dtype=float)
        return 0.0 * np.asarray(r, dtype=float)

    def v_plus_of(self, r):
        if self.v_plus is None:
            return 0.0 * np.asarray(r, dtype=float)
        return np.asarray(self.v_plus(np.asarray(r, dtype=float)), dtype=float)

    def potential(self, r):
        """V = V_+ - V_-."""
        return self.v_plus_of(r) - self.v_minus_of(r)

    # catalog closed forms -------------------------------------------------

    @property
    def closed_form(self) -> Optional[str]:
        """Tag of the cataloged antiderivative, or None."""
        k = self.kind
        if k in ("log_singular", "custom_table"):
            return None
        if k == "reissner_nordstrom":
            return f"reissner_nordstrom_case{self.rn_case()}"
        return k

    def rn_case(self) -> int:
        m, e = self.params["m"], self.params["e"]
        inner = self.region == "inner"
        if m * m < e * e:
            return 7
        if m * m == e * e:
            return 4 if inner else 6
        return 1 if inner else 3

    def closed_tau(self, r):
        """Antiderivative of tau_density with the catalog constant."""
        p, k = self.params, self.kind
        if k == "minkowski":
            return _closed.minkowski(r, p["c"])
        if k == "power_singular":
            return _closed.power_singular(r, p["alpha"], p["beta"])
        if k == "power_infinity":
            return _closed.power_infinity(r, p["alpha"], p["beta"])
        if k == "schwarzschild":
            return _closed.schwarzschild(r, p["m"], p["c"])
        if k == "reissner_nordstrom":
            return _closed.reissner_nordstrom(self.rn_case(), r, p["m"], p["e"])
        if k == "de_sitter":
            return _closed.de_sitter(r, p["ell"])
        if k == "coulomb":
            return _closed.coulomb(r)
        if k == "spectrum_hydrogen":
            return _closed.spectrum_hydrogen(r, p["level"])
        raise ValueError(f"{k} has no closed-form inner time")

    def default_anchor(self) -> float:
        lo, hi = self.domain
        if self.kind == "schwarzschild":
            return max(lo, 2.0 * self.params["m"] + 1.0) if math.isinf(hi) else 0.5 * (lo + hi)
        if "horizon_at_inner" in self.markers:
            return lo + 1.0 if math.isinf(hi) else 0.5 * (lo + hi)
        return lo

    # domain helpers -------------------------------------------------------

    def check_closure(self, r):
        lo, hi = self.domain
        if not (math.isfinite(r) and lo <= r <= hi):
            raise OutOfDomain(f"r={r!r} outside domain [{lo}, {hi}]")

    def check_interior(self, r):
        lo, hi = self.domain
        if not (math.isfinite(r) and lo < r < hi):
            raise OutOfDomain(f"r={r!r} outside open domain ({lo}, {hi})")

    def singular_lo(self) -> bool:
        return bool(self.markers & {"singularity_at_inner", "horizon_at_inner"})

    def singular_hi(self) -> bool:
        return "horizon_at_outer" in self.markers and math.isfinite(self.domain[1])


# quadrature ---------------------------------------------------------------

def _scalar_density(p: RadialPotential):
    def f(x):
        return float(p.tau_density(x))
    return f


def _quad(f, a, b):
    # full_output keeps quad from warning; convergence is judged by the caller
    val, err, *_ = integrate.quad(f, a, b, epsabs=0.0, epsrel=_QUAD_RTOL, limit=200,
                                  full_output=1)
    if not math.isfinite(val):
        raise NonIntegrableAtEndpoint(f"quadrature failed on [{a}, {b}]")
    return val


def _graded_points(p, a, b):
    """Breakpoints in [a, b] refining geometrically toward marked ends."""
    lo, hi = p.domain
    pts = [a, b]
    if p.singular_lo() and a > lo:
        x = lo + 2.0 * (a - lo)
        while x < b and len(pts) < 400:
            pts.append(x)
            x = lo + 2.0 * (x - lo)
    if p.singular_hi() and b < hi:
        x = hi - 2.0 * (hi - b)
        while x > a and len(pts) < 800:
            pts.append(x)
            x = hi - 2.0 * (hi - x)
    return sorted(set(pts))


def _tail(f, end, start, toward_lo):
    """Improper integral from ``start`` to the marked endpoint ``end``."""
    total = 0.0
    quiet = 0
    x = start
    for _ in range(_MAX_TAIL):
        y = end + 0.5 * (x - end)
        piece = _quad(f, y, x) if toward_lo else _quad(f, x, y)
        total += piece
        if abs(piece) <= 1e-15 * max(abs(total), 1e-300):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
        x = y
    raise NonIntegrableAtEndpoint(f"inner time diverges toward r={end}")


def _integrate(p: RadialPotential, a: float, b: float) -> float:
    """Unsigned integral of tau_density over [a, b], a < b."""
    f = _scalar_density(p)
    lo, hi = p.domain
    total = 0.0
    if a == lo and p.singular_lo():
        mid = lo + 0.5 * (b - lo)
        total += _tail(f, lo, mid, True)
        a = mid
    if b == hi and p.singular_hi():
        mid = hi - 0.5 * (hi - a)
        total += _tail(f, hi, mid, False)
        b = mid
    pts = _graded_points(p, a, b)
    for x0, x1 in zip(pts[:-1], pts[1:]):
        total += _quad(f, x0, x1)
    return total


def tau_of_r(p: RadialPotential, r_ref: float, r: float) -> float:
    """Signed inner time from ``r_ref`` to ``r``."""
    r_ref, r = float(r_ref), float(r)
    p.check_closure(r_ref)
    p.check_closure(r)
    if r == r_ref:
        return 0.0
    if r > r_ref:
        return _integrate(p, r_ref, r)
    return -_integrate(p, r, r_ref)


def tau_many(p: RadialPotential, r_ref: float, rs) -> np.ndarray:
    """Vectorised tau_of_r via cumulative quadrature between sorted radii."""
    rs = np.asarray(rs, dtype=float)
    flat = rs.ravel()
    for x in (r_ref, *flat):
        p.check_closure(float(x))
    order = np.argsort(flat, kind="stable")
    out = np.empty_like(flat)
    up = [i for i in order if flat[i] >= r_ref]
    down = [i for i in order[::-1] if flat[i] < r_ref]
    acc, prev = 0.0, float(r_ref)
    for i in up:
        x = float(flat[i])
        if x > prev:
            acc += _integrate(p, prev, x)
            prev = x
        out[i] = acc
    acc, prev = 0.0, float(r_ref)
    for i in down:
        x = float(flat[i])
        if x < prev:
            acc -= _integrate(p, x, prev)
            prev = x
        out[i] = acc
    return out.reshape(rs.shape)


def closed_form_tau(p: RadialPotential, r_ref: float, r):
    """Closed-form counterpart of tau_of_r (differences of the antiderivative)."""
    if p.closed_form is None:
        raise ValueError(f"{p.kind} has no closed-form inner time")
    return p.closed_tau(r) - p.closed_tau(r_ref)


# charts ---------------------------------------------------------------------

def _window_grid(p, lo, hi, n):
    """Radii in [lo, hi], geometric toward marked ends, uniform otherwise."""
    dlo, dhi = p.domain
    u = np.linspace(0.0, 1.0, n)
    if lo == dlo and p.singular_lo() and lo >= 0:
        span = hi - lo
        g = lo + span * np.concatenate(([0.0], np.geomspace(1e-12, 1.0, n - 1)))
        return np.unique(np.clip(g, lo, hi))
    if hi == dhi and p.singular_hi():
        span = hi - lo
        g = hi - span * np.concatenate(([0.0], np.geomspace(1e-12, 1.0, n - 1)))
        return np.unique(np.clip(g, lo, hi))
    return lo + (hi - lo) * u


@dataclass(frozen=True, eq=False)
class InnerTimeChart:
    """Monotone tabulated map r <-> tau on a finite window."""

    potential: RadialPotential
    r_ref: float
    window: tuple
    closed_form: Optional[str]
    table: tuple

    @classmethod
    def build(cls, p: RadialPotential, r_ref: float, window=None, n: int = 257):
        lo, hi = window if window is not None else p.domain
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise OutOfDomain("chart window must be a finite interval")
        p.check_closure(lo)
        p.check_closure(hi)
        rs = _window_grid(p, lo, hi, n)
        taus = tau_many(p, r_ref, rs)
        if np.any(np.diff(taus) <= 0):
            raise OutOfDomain("inner time not strictly monotone on the chart window")
        return cls(p, float(r_ref), (lo, hi), p.closed_form, (rs, taus))

    def tau(self, r: float) -> float:
        if self.closed_form is not None:
            return float(closed_form_tau(self.potential, self.r_ref, r))
        rs, ts = self.table
        i = int(np.clip(np.searchsorted(rs, r) - 1, 0, len(rs) - 2))
        base = float(ts[i])
        return base + (_integrate(self.potential, float(rs[i]), r) if r > rs[i] else
                       -_integrate(self.potential, r, float(rs[i])) if r < rs[i] else 0.0)

    def tau_range(self):
        rs, ts = self.table
        return float(ts[0]), float(ts[-1])

    def to_csv_rows(self):
        rs, ts = self.table
        return [("r", "tau")] + list(zip(rs.tolist(), ts.tolist()))


def r_of_tau(chart: InnerTimeChart, tau: float) -> float:
    """Invert the chart by a bracketed monotone root find."""
    t0, t1 = chart.tau_range()
    tol = 1e-12 * max(1.0, abs(tau))
    if not (t0 - tol <= tau <= t1 + tol):
        raise OutOfRange(f"tau={tau} outside chart range [{t0}, {t1}]")
    rs, ts = chart.table
    j = int(np.clip(np.searchsorted(ts, tau), 1, len(ts) - 1))
    a, b = float(rs[j - 1]), float(rs[j])
    fa, fb = chart.tau(a) - tau, chart.tau(b) - tau
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        # table vs closed form rounding at the extreme ends
        return a if abs(fa) < abs(fb) else b
    return optimize.brentq(lambda x: chart.tau(x) - tau, a, b, xtol=1e-300, rtol=1e-15,
                           maxiter=400)


def invert_many(p: RadialPotential, r_ref: float, taus, lo: float, hi: float) -> np.ndarray:
    """Vectorised inverse of tau on [lo, hi] for simulation grids."""
    taus = np.asarray(taus, dtype=float)
    if p.closed_form is None:
        chart = InnerTimeChart.build(p, r_ref, (lo, hi), n=4097)
        rs, ts = chart.table
        return PchipInterpolator(ts, rs)(taus)
    # bisection in a log-distance variable when an end is singular
    dlo, dhi = p.domain
    base = None
    if lo == dlo and p.singular_lo():
        base, sgn = lo, 1.0
    elif hi == dhi and p.singular_hi():
        base, sgn = hi, -1.0
    t_of = lambda r: closed_form_tau(p, r_ref, r)
    if base is not None:
        far = hi if sgn > 0 else lo
        ua = np.full(taus.shape, -745.0)
        ub = np.full(taus.shape, math.log(abs(far - base)))
        for _ in range(200):
            um = 0.5 * (ua + ub)
            with np.errstate(all="ignore"):
                tm = t_of(base + sgn * np.exp(um))
            below = (tm < taus) if sgn > 0 else (tm > taus)
            ua = np.where(below, um, ua)
            ub = np.where(below, ub, um)
        return base + sgn * np.exp(0.5 * (ua + ub))
    ra = np.full(taus.shape, lo)
    rb = np.full(taus.shape, hi)
    for _ in range(200):
        rm = 0.5 * (ra + rb)
        below = t_of(rm) < taus
        ra = np.where(below, rm, ra)
        rb = np.where(below, rb, rm)
    return 0.5 * (ra + rb)


# profiles -------------------------------------------------------------------

def geometry_profile(p: RadialPotential, r_ref: float, r: float) -> dict:
    """Return q, sigma and w = q^{3/4} sigma tau at an interior radius."""
    p.check_interior(float(r))
    tau = tau_of_r(p, r_ref, r)
    q = float(p.q(r))
    s = float(p.sigma(r))
    return {"q_minus": q, "sigma": s, "w": q ** 0.75 * s * tau, "tau": tau}


def _dlogw_closed(p, r, tau):
    r = np.asarray(r, dtype=float)
    q = p.q(r)
    dens = p.tau_density(r)
    return 0.75 * p.dq(r) / q + (p.dimension - 1) / (2.0 * r) + dens / tau


def _dual_from_tau(p, r, tau):
    dens = p.tau_density(r)
    return np.abs(tau * _dlogw_closed(p, r, tau) / dens)


def _logw_custom(p, r_ref, r):
    t = tau_of_r(p, r_ref, r)
    if t == 0.0:
        raise ZeroW(f"w vanishes at r={r}")
    return 0.75 * math.log(float(p.q(r))) + math.log(float(p.sigma(r))) + math.log(abs(t))


def _dlogw_custom(p, r_ref, r):
    """Fourth-order difference of log|w|; one-sided within two cells of an end."""
    rs = p.table[0]
    h = float(np.min(np.diff(rs))) * 0.25
    lo, hi = p.domain
    f = lambda x: _logw_custom(p, r_ref, x)
    if r - 2 * h >= lo and r + 2 * h <= hi and abs(r - rs[0]) > 2 * h * 4 and abs(rs[-1] - r) > 2 * h * 4:
        return (f(r - 2 * h) - 8 * f(r - h) + 8 * f(r + h) - f(r + 2 * h)) / (12 * h)
    s = 1.0 if r - lo < hi - r else -1.0
    v = [f(r + s * k * h) for k in range(5)]
    return s * (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h)


def dual_potential(p: RadialPotential, r_ref: float, r: float) -> float:
    """tau |d log w / d tau| = q^{1/2} g_rr^{-1/2} tau |d log w / dr|."""
    r = float(r)
    p.check_interior(r)
    tau = tau_of_r(p, r_ref, r)
    if tau == 0.0:
        raise ZeroW(f"w vanishes at r={r} (anchor point)")
    if p.kind == "custom_table":
        return abs(tau * _dlogw_custom(p, r_ref, r) / float(p.tau_density(r)))
    return float(_dual_from_tau(p, r, tau))


def window_profile(p: RadialPotential, r_ref: float, rs) -> dict:
    """Vectorised tau, q tau and dual potential on interior sample radii."""
    rs = np.asarray(rs, dtype=float)
    for x in rs:
        p.check_interior(float(x))
    tau = tau_many(p, r_ref, rs)
    if np.any(tau == 0.0):
        raise ZeroW("a sample coincides with the anchor (w = 0)")
    if p.kind == "custom_table":
        dual = np.array([dual_potential(p, r_ref, x) for x in rs])
    else:
        dual = _dual_from_tau(p, rs, tau)
    qtau = p.q(rs) * np.abs(tau)
    return {"r": rs, "tau": tau, "dual": dual, "qtau": qtau}


def log_singular_factor(delta: float, L):
    """H(L) with tau(r) = r^2 H(L) for q = r^{-2} L^{-delta}, L = -log r, anchored at 0.

    Substituting s = r e^{-v} gives H(L) = int_0^inf e^{-2v} (L + v)^{delta/2} dv exactly.
    """
    L = np.atleast_1d(np.asarray(L, dtype=float))
    out = np.array([integrate.quad(lambda v, x=x: math.exp(-2.0 * v) * (x + v) ** (0.5 * delta),
                                   0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]
                    for x in L])
    return out


def log_singular_profile(p: RadialPotential, L) -> dict:
    """Scale-free q tau and dual potential for log_singular, in terms of L = -log r.

    Both quantities depend on L alone, so windows far below the double-precision
    range of r can still be evaluated.
    """
    if p.kind != "log_singular":
        raise ValueError("log_singular_profile needs a log_singular potential")
    d, n = p.params["delta"], p.dimension
    L = np.atleast_1d(np.asarray(L, dtype=float))
    H = log_singular_factor(d, L)
    qtau = L ** -d * H
    dual = np.abs(1.0 + H * L ** (-0.5 * d) * (0.75 * (-2.0 + d / L) + 0.5 * (n - 1)))
    return {"L": L, "H": H, "qtau": qtau, "dual": dual}


# completeness ---------------------------------------------------------------

@dataclass
class CompletenessReport:
    endpoint: str
    diverges: bool
    cutoffs: list
    taus: list


def completeness_report(p: RadialPotential, endpoint: str, anchor: Optional[float] = None,
                        levels: int = 40, threshold: float = 10.0) -> CompletenessReport:
    """Trace tau toward a domain end on geometric cutoffs."""
    lo, hi = p.domain
    if anchor is None:
        if math.isfinite(hi):
            anchor = 0.5 * (lo + hi)
        else:
            anchor = lo + 1.0
    anchor = float(anchor)
    if endpoint == "inner":
        cuts = [lo + (anchor - lo) * 2.0 ** -k for k in range(1, levels + 1)]
    elif endpoint == "outer" and math.isfinite(hi):
        cuts = [hi - (hi - anchor) * 2.0 ** -k for k in range(1, levels + 1)]
    elif endpoint == "outer":
        cuts = [anchor + 2.0 ** k for k in range(1, levels + 1)]
    else:
        raise ValueError("endpoint must be 'inner' or 'outer'")
    vals = np.abs(tau_many(p, anchor, np.array(cuts)))
    step = abs(vals[-1] - vals[-2])
    cauchy = step <= 1e-9 * max(1.0, vals[-1])
    diverges = (not cauchy) and vals[-1] > threshold
    return CompletenessReport(endpoint, bool(diverges), cuts, vals.tolist())
