"""Quadratic-form checks by composite Gauss-Legendre quadrature.

Every integral is evaluated on panels that double until two successive
results agree to 1e-9 relative (at least 2048 panels, at most 2**20).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import CoverageGap, ProfileViolatesZeroAtOrigin, SupportOutsideWindow
from .geometry import RadialPotential

SHAPES = ("polynomial_bump", "gaussian_bump", "piecewise_linear")

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_MIN_PANELS = 2048
_MAX_PANELS = 2 ** 20
_RTOL = 1e-9
_GAUSS_A = 4.0


def _panel_nodes(breaks, panels):
    """Gauss nodes and weights on `panels` panels spread over the pieces of `breaks`."""
    breaks = np.asarray(breaks, dtype=float)
    lengths = np.diff(breaks)
    share = np.maximum(1, np.round(panels * lengths / lengths.sum()).astype(int))
    edges = np.concatenate([np.linspace(a, b, k + 1)[:-1] for a, b, k in zip(breaks[:-1], breaks[1:], share)]
                           + [breaks[-1:]])
    h = np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + 0.5 * h[:, None] * _GL_X[None, :]).ravel()
    w = (0.5 * h[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _converge(evaluate: Callable[[int], np.ndarray]) -> np.ndarray:
    """Double the panel count until every component settles."""
    n = _MIN_PANELS
    prev = np.asarray(evaluate(n), dtype=float)
    while n < _MAX_PANELS:
        n *= 2
        cur = np.asarray(evaluate(n), dtype=float)
        scale = np.maximum(np.abs(cur), 1e-300)
        if np.all(np.abs(cur - prev) <= _RTOL * scale):
            return cur
        prev = cur
    return prev


# profiles ---------------------------------------------------------------

@dataclass(frozen=True)
class TestProfile:
    """Compactly supported C^1 test function.

    ``coordinate="log"`` draws the bump in s = log r and multiplies it by
    r**weight, which reaches the Hardy-extremal shapes r**((2-n)/2).
    """

    __test__ = False  # not a pytest class

    shape: str
    support: tuple
    amplitude: float = 1.0
    center: Optional[float] = None
    coordinate: str = "r"
    weight: float = 0.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown profile shape {self.shape!r}")
        a, b = (float(v) for v in self.support)
        if not (a < b) or not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("profile support must be a finite interval [a, b] with a < b")
        if self.coordinate not in ("r", "log"):
            raise ValueError("coordinate must be 'r' or 'log'")
        if self.coordinate == "log" and a <= 0:
            raise ValueError("log profiles need a positive support")
        object.__setattr__(self, "support", (a, b))
        lo, hi = self._s_range
        c = 0.5 * (lo + hi) if self.center is None else float(self.center)
        if self.coordinate == "log" and self.center is not None:
            c = math.log(c)
        if not lo < c < hi:
            raise ValueError("profile center must lie inside the support")
        object.__setattr__(self, "_c", c)

    @property
    def width(self) -> float:
        return self.support[1] - self.support[0]

    @property
    def _s_range(self):
        a, b = self.support
        return (math.log(a), math.log(b)) if self.coordinate == "log" else (a, b)

    def _bump(self, s):
        """Shape and its s-derivative, zero outside the support."""
        lo, hi = self._s_range
        s = np.asarray(s, dtype=float)
        inside = (s > lo) & (s < hi)
        v = np.zeros_like(s)
        d = np.zeros_like(s)
        if self.shape == "piecewise_linear":
            c = self._c
            up = inside & (s <= c)
            dn = inside & (s > c)
            v[up] = (s[up] - lo) / (c - lo)
            d[up] = 1.0 / (c - lo)
            v[dn] = (hi - s[dn]) / (hi - c)
            d[dn] = -1.0 / (hi - c)
        else:
            h = 0.5 * (hi - lo)
            u = (s[inside] - 0.5 * (lo + hi)) / h
            if self.shape == "polynomial_bump":
                v[inside] = (1 - u * u) ** 2
                d[inside] = -4 * u * (1 - u * u) / h
            else:
                g = np.exp(-_GAUSS_A * u * u)
                e = math.exp(-_GAUSS_A)
                v[inside] = (g - e) * (1 - u * u)
                d[inside] = (-2 * _GAUSS_A * u * g * (1 - u * u) - 2 * u * (g - e)) / h
        return self.amplitude * v, self.amplitude * d

    def __call__(self, r):
        return self.value_and_derivative(r)[0]

    def value_and_derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.coordinate == "r":
            return self._bump(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.log(np.where(r > 0, r, np.nan))
        v, d = self._bump(np.nan_to_num(s, nan=-np.inf))
        rw = np.where(r > 0, np.abs(r) ** self.weight, 0.0)
        val = rw * v
        with np.errstate(divide="ignore", invalid="ignore"):
            der = np.where(r > 0, rw / np.where(r > 0, r, 1.0) * (self.weight * v + d), 0.0)
        return val, der

    def nodes(self, panels: int):
        """Radii and dr-weights of a composite rule aligned with the kinks."""
        lo, hi = self._s_range
        breaks = [lo, self._c, hi] if self.shape == "piecewise_linear" else [lo, hi]
        s, w = _panel_nodes(breaks, panels)
        if self.coordinate == "log":
            r = np.exp(s)
            return r, w * r
        return s, w

    def to_dict(self):
        out = {"shape": self.shape, "support": list(self.support), "amplitude": self.amplitude,
               "center": float(math.exp(self._c) if self.coordinate == "log" else self._c),
               "width": self.width}
        if self.coordinate == "log":
            out.update(coordinate="log", weight=self.weight)
        return out


def random_bumps(lo: float, hi: float, count: int, rng: np.random.Generator,
                 margin: float = 0.02) -> list:
    """`count` random profiles with supports strictly inside (lo, hi)."""
    span = hi - lo
    a0, b0 = lo + margin * span, hi - margin * span
    out = []
    for _ in range(count):
        a, b = np.sort(rng.uniform(a0, b0, size=2))
        if b - a < 1e-3 * span:
            b = min(b0, a + 1e-3 * span)
        shape = SHAPES[int(rng.integers(len(SHAPES)))]
        c = rng.uniform(a + 0.1 * (b - a), b - 0.1 * (b - a))
        out.append(TestProfile(shape, (a, b), amplitude=float(rng.uniform(0.5, 2.0)), center=c))
    return out


def singular_sweep(hi: float, n: int, trials: int = 1000, lo: float = 1e-12) -> list:
    """Profiles pushed toward r = 0: shrinking r-bumps plus log-scale power-weighted bumps.

    The log family uses weight (2-n)/2 and widens in log r, which is how a
    Hardy-extremal sequence approaches the sharp constant.
    """
    out = []
    n_r = trials // 2
    centers = np.geomspace(hi / 2, max(lo, hi * 1e-8), max(1, n_r // 6))
    for i, c in enumerate(centers):
        for rel in (1.9, 1.0):
            half = 0.5 * rel * c
            for shape in SHAPES:
                if len(out) < n_r:
                    out.append(TestProfile(shape, (c - half, c + half)))
    n_log = trials - len(out)
    spans = np.linspace(1.0, 60.0, max(1, -(-n_log // len(SHAPES))))
    for L in spans:
        a = hi * math.exp(-L)
        if a < lo:
            a = lo
        for shape in SHAPES:
            if len(out) < trials and a < hi:
                out.append(TestProfile(shape, (a, hi), coordinate="log", weight=(2 - n) / 2))
    return out[:trials]


# Hardy ---------------------------------------------------------------------

def _graded_integral(g, tau0, panels, levels=900):
    """Integral of g over (0, tau0] with geometric panels toward 0 and a power-law tail."""
    x, w = _panel_nodes(np.linspace(0.0, tau0, 2), panels)
    total = float(np.sum(w * g(x)))
    # replace the first panel by a geometric ladder
    h = tau0 / panels
    xg, wg = _panel_nodes([h / 2, h], 1)
    first = x < h
    total -= float(np.sum(w[first] * g(x[first])))
    k = np.arange(levels)
    scale = 2.0 ** -k
    xl = (xg[None, :] * scale[:, None]).ravel()
    wl = (wg[None, :] * scale[:, None]).ravel()
    total += float(np.sum(wl * g(xl)))
    x0 = h * 2.0 ** -levels
    g0, g1 = float(g(np.array([x0]))[0]), float(g(np.array([x0 / 2]))[0])
    if g0 > 0 and g1 > 0:
        p = math.log2(g0 / g1)
        total += g0 * x0 / (p + 1) if p > -1 else math.inf
    return total


def power_profile(s: float):
    """(f, f') for f(tau) = tau**s."""
    return (lambda t: np.asarray(t, dtype=float) ** s,
            lambda t: s * np.asarray(t, dtype=float) ** (s - 1))


def hardy_check(f, tau0: float, df: Optional[Callable] = None) -> dict:
    """Compare int f^2/tau^2 with 4 int f'^2 on (0, tau0]."""
    if isinstance(f, TestProfile):
        prof = f
        f = lambda t: prof.value_and_derivative(t)[0]
        df = lambda t: prof.value_and_derivative(t)[1]
    elif df is None:
        raise ValueError("hardy_check needs the derivative of a plain callable")
    f0 = float(np.asarray(f(np.array([0.0])))[0])
    if not math.isfinite(f0) or abs(f0) > 1e-12:
        raise ProfileViolatesZeroAtOrigin(f"f(0) = {f0}")

    def g_lhs(t):
        return (np.asarray(f(t), dtype=float) / t) ** 2

    def g_rhs(t):
        return 4.0 * np.asarray(df(t), dtype=float) ** 2

    lhs, rhs = _converge(lambda n: (_graded_integral(g_lhs, tau0, n), _graded_integral(g_rhs, tau0, n)))
    return {"lhs": float(lhs), "rhs": float(rhs), "holds": bool(lhs <= rhs + 1e-10)}


# Lemma 2 positivity --------------------------------------------------------

def _check_support(phi: TestProfile, lo: float, hi: float, p: RadialPotential):
    a, b = phi.support
    if not (lo < a and b <= hi) or not (p.domain[0] < a and b <= p.domain[1]):
        raise SupportOutsideWindow(f"support [{a}, {b}] not strictly inside [{lo}, {hi}]")


def form_integrals(p: RadialPotential, phi: TestProfile) -> dict:
    """int q phi^2 dmu, int |grad phi|^2 dmu and int V_- phi^2 dmu.

    dmu = sqrt(g_rr) r^{n-1} dr, which equals q^{1/2} sigma^2 dtau, and
    |grad phi|^2 = phi_r^2 / g_rr = q^{-1} phi_tau^2.
    """
    def ev(n):
        r, w = phi.nodes(n)
        v, d = phi.value_and_derivative(r)
        grr = p.g_rr(r)
        mu = w * np.sqrt(grr) * p.sigma2(r)
        return (np.sum(mu * p.q(r) * v * v), np.sum(mu * d * d / grr), np.sum(mu * p.v_minus_of(r) * v * v))

    q_int, grad, vm = _converge(ev)
    return {"q": float(q_int), "grad": float(grad), "v_minus": float(vm)}


def positivity_check(p: RadialPotential, phi: TestProfile, w, delta: float) -> dict:
    """int q phi^2 dmu <= delta int |grad phi|^2 dmu for phi inside the window."""
    lo, hi = w.interval
    _check_support(phi, lo, hi, p)
    it = form_integrals(p, phi)
    lhs, rhs = it["q"], it["grad"]
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= delta * rhs * (1 + 1e-8))}


def minorant_form_check(p: RadialPotential, delta_t: float, phi: TestProfile) -> dict:
    """delta_t int |grad phi|^2 + int q phi^2 >= int V_- phi^2."""
    _check_support(phi, p.domain[0], p.domain[1], p)
    it = form_integrals(p, phi)
    lhs = delta_t * it["grad"] + it["q"]
    rhs = it["v_minus"]
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs >= rhs * (1 - 1e-10))}


def nonnegativity_check(n: int, beta2: float, phi: TestProfile) -> dict:
    """int |grad phi|^2 - beta^2 int phi^2 r^-2 >= 0 in R^n (radial phi)."""
    if phi.support[0] <= 0:
        raise SupportOutsideWindow("profile must stay away from r = 0")

    def ev(k):
        r, w = phi.nodes(k)
        v, d = phi.value_and_derivative(r)
        return np.sum(w * d * d * r ** (n - 1)), np.sum(w * v * v * r ** (n - 3))

    grad, hardy = _converge(ev)
    lhs, rhs = float(grad), float(beta2 * hardy)
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs >= rhs * (1 - 1e-10))}


# falsification -------------------------------------------------------------

@dataclass
class FalsificationReport:
    condition: str
    parameters: dict
    witness_profile: Optional[dict]
    lhs: Optional[float]
    rhs: Optional[float]
    trials: int = 0
    worst_ratio: float = 0.0

    @property
    def found(self) -> bool:
        return self.witness_profile is not None

    def to_dict(self):
        return asdict(self)


def falsify(condition: str, parameters: dict, profiles: Iterable[TestProfile],
            check: Callable[[TestProfile], dict], ratio: Callable[[dict], float]) -> FalsificationReport:
    """Scan profiles until `check` fails; keep the closest call otherwise."""
    rep = FalsificationReport(condition, parameters, None, None, None)
    best = None
    for phi in profiles:
        rep.trials += 1
        res = check(phi)
        rho = ratio(res)
        if best is None or rho > rep.worst_ratio:
            rep.worst_ratio, best = rho, (phi, res)
        if not res["holds"]:
            rep.witness_profile, rep.lhs, rep.rhs = phi.to_dict(), res["lhs"], res["rhs"]
            rep.worst_ratio = rho
            return rep
    if best is not None:
        rep.lhs, rep.rhs = best[1]["lhs"], best[1]["rhs"]
    return rep


def falsify_positivity(p: RadialPotential, w, delta: float, trials: int = 1000) -> FalsificationReport:
    prm = {"kind": p.kind, **p.params, "n": p.dimension, "delta": delta, "window": list(w.interval)}
    lo, hi = w.interval
    floor = lo * (1 + 1e-9) if lo > 0 else 1e-12
    profs = [phi for phi in singular_sweep(hi, p.dimension, trials, lo=floor) if phi.support[0] > lo]
    return falsify("positivity", prm, profs,
                   lambda phi: positivity_check(p, phi, w, delta),
                   lambda res: res["lhs"] / (delta * res["rhs"]))


def falsify_nonnegativity(n: int, beta2: float, trials: int = 1000) -> FalsificationReport:
    profs = singular_sweep(1.0, n, trials)
    return falsify("nonnegativity", {"n": n, "beta2": beta2}, profs,
                   lambda phi: nonnegativity_check(n, beta2, phi),
                   lambda res: res["rhs"] / res["lhs"])


# IMS localisation ---------------------------------------------------------

@dataclass(frozen=True)
class CutoffFamily:
    """Plateau cutoffs in tau with linear ramps of length tau_eps/2.

    Member k equals 1 on |tau - centers[k]| <= radii[k]. ``renormalize``
    divides by sqrt(sum zeta^2) so that the squares sum to one where covered.
    ``region`` is where the partition must be exact.
    """

    centers: tuple
    radii: tuple
    tau_eps: float
    region: tuple
    renormalize: bool = True

    def __post_init__(self):
        c = tuple(float(v) for v in self.centers)
        rad = tuple(float(v) for v in self.radii)
        if len(c) != len(rad) or not c:
            raise ValueError("centers and radii must have equal nonzero length")
        if self.tau_eps < 0 or any(v < 0 for v in rad):
            raise ValueError("radii and tau_eps must be nonnegative")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", rad)
        object.__setattr__(self, "region", tuple(float(v) for v in self.region))

    @property
    def ramp(self) -> float:
        return 0.5 * self.tau_eps

    def breakpoints(self):
        pts = {*self.region}
        for c, r in zip(self.centers, self.radii):
            for edge in (c - r, c + r, c - r - self.ramp, c + r + self.ramp):
                if math.isfinite(edge):
                    pts.add(edge)
        return np.array(sorted(pts))

    def zeta(self, x):
        x = np.asarray(x, dtype=float)
        z = np.empty((len(self.centers), x.size))
        dz = np.empty_like(z)
        for k, (c, r) in enumerate(zip(self.centers, self.radii)):
            dist = np.abs(x - c) - r
            if self.ramp > 0:
                z[k] = np.clip(1 - dist / self.ramp, 0.0, 1.0)
                ramping = (dist > 0) & (dist < self.ramp)
                dz[k] = np.where(ramping, -np.sign(x - c) / self.ramp, 0.0)
            else:
                z[k] = (dist <= 0).astype(float)
                dz[k] = 0.0
        return z, dz

    def J(self, x):
        """Members and their derivatives, shape (members, len(x))."""
        z, dz = self.zeta(x)
        if not self.renormalize:
            return z, dz
        s2 = np.sum(z * z, axis=0)
        ok = s2 > 0
        S = np.sqrt(np.where(ok, s2, 1.0))
        zz = np.sum(z * dz, axis=0)
        J = np.where(ok, z / S, 0.0)
        dJ = np.where(ok, dz / S - z * zz / S ** 3, 0.0)
        return J, dJ

    def sample_grid(self, per_piece: int = 256):
        """Interior points of every smooth piece (kinks themselves are excluded)."""
        b = self.breakpoints()
        t = (np.arange(per_piece) + 0.5) / per_piece
        return np.concatenate([lo + (hi - lo) * t for lo, hi in zip(b[:-1], b[1:]) if hi > lo])


def ims_error(fam: CutoffFamily, per_piece: int = 256) -> float:
    """Essential sup of sum |J_k'|^2; CoverageGap when sum J^2 != 1 on the region."""
    x = fam.sample_grid(per_piece)
    J, dJ = fam.J(x)
    lo, hi = fam.region
    inside = (x >= lo) & (x <= hi)
    dev = np.abs(np.sum(J * J, axis=0) - 1.0)[inside]
    if dev.size and float(dev.max()) > 1e-9:
        raise CoverageGap(f"sum of squares deviates from 1 by {float(dev.max()):.3g}")
    return float(np.max(np.sum(dJ * dJ, axis=0)))


def ims_identity(fam: CutoffFamily, phi: TestProfile) -> dict:
    """Both sides of int phi'^2 = sum int ((J phi)')^2 - int (sum J'^2) phi^2 on the tau line."""
    a, b = phi.support
    lo, hi = fam.region
    if not (lo <= a and b <= hi):
        raise SupportOutsideWindow("profile must lie in the covered region")
    kinks = [v for v in fam.breakpoints() if a < v < b]
    if phi.shape == "piecewise_linear":
        kinks.append(phi._c)
    breaks = np.array(sorted({a, b, *kinks}))

    def ev(n):
        x, w = _panel_nodes(breaks, n)
        v, d = phi.value_and_derivative(x)
        J, dJ = fam.J(x)
        lhs = np.sum(w * d * d)
        parts = np.sum(w * np.sum((dJ * v + J * d) ** 2, axis=0))
        err = np.sum(w * np.sum(dJ * dJ, axis=0) * v * v)
        return lhs, parts - err

    lhs, rhs = _converge(ev)
    return {"lhs": float(lhs), "rhs": float(rhs), "rel": float(abs(lhs - rhs) / max(abs(lhs), 1e-300))}


# Addendum ------------------------------------------------------------------

def self_adjointness_feasible(n: int, alpha: float) -> dict:
    """beta^2 - (n-2) beta + 1 + alpha <= 0 for some beta > 0, decided in exact arithmetic."""
    if n < 1 or alpha < 0:
        raise ValueError("need n >= 1 and alpha >= 0")
    a = Fraction(alpha)
    half = Fraction(n - 2, 2)
    feasible = half > 0 and half * half >= 1 + a
    out = {"feasible": bool(feasible), "beta_witness": None,
           "min_value": float(1 + a - half * half) if half > 0 else float(1 + a)}
    if feasible:
        out["beta_witness"] = float(half)
    return out


def alpha_boundary(n: int) -> Fraction:
    """Largest coupling with a witness: ((n-2)/2)^2 - 1."""
    return Fraction(n - 2, 2) ** 2 - 1
