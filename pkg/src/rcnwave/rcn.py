"""Range control neighborhood certification.

A radial window is certified when constants (C0, eps0, A, delta0) exist with

    4 (1/C0^2 + eps0^2) sup_dual^2 < 1 - A - delta0,
    4 (C0^2 + 1/eps0^2) sup_qtau^2 < A - delta0,

after which delta = (A - delta0) / (A + delta0) is the relative form bound.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleCertificate, OutOfDomain
from .geometry import RadialPotential, log_singular_profile, window_profile

WINDOW_KINDS = ("regular_point", "singular_center", "infinity_layer")


@dataclass(frozen=True, eq=False)
class RcnWindow:
    potential: RadialPotential
    r_ref: float
    interval: tuple
    kind: str = "singular_center"
    depth: Optional[float] = None

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.depth is not None:
            # window (0, exp(-depth)] of a log_singular minorant, held in L = -log r
            if self.potential.kind != "log_singular" or self.depth <= -math.log(self.potential.domain[1]):
                raise OutOfDomain("depth windows need log_singular and exp(-depth) inside the domain")
            object.__setattr__(self, "interval", (0.0, math.exp(-self.depth)))
            object.__setattr__(self, "r_ref", 0.0)
            return
        lo, hi = (float(x) for x in self.interval)
        dlo, dhi = self.potential.domain
        if not (dlo <= lo < hi <= dhi) or not math.isfinite(hi):
            raise OutOfDomain(f"window [{lo}, {hi}] outside domain [{dlo}, {dhi}]")
        if not (lo <= self.r_ref <= hi):
            raise OutOfDomain("window anchor must lie in the window")
        object.__setattr__(self, "interval", (lo, hi))
        object.__setattr__(self, "r_ref", float(self.r_ref))

    def touches_horizon(self) -> Optional[str]:
        p = self.potential
        lo, hi = self.interval
        if lo == p.domain[0] and "horizon_at_inner" in p.markers:
            return "inner"
        if hi == p.domain[1] and "horizon_at_outer" in p.markers:
            return "outer"
        return None


def infinity_layer(p: RadialPotential, lo: float, hi: float) -> RcnWindow:
    """Layer of a neighborhood of infinity, tau measured from the edge facing away from it."""
    if "horizon_at_outer" in p.markers or p.kind == "power_infinity":
        return RcnWindow(p, lo, (lo, hi), "infinity_layer")
    return RcnWindow(p, hi, (lo, hi), "infinity_layer")


def log_singular_window(p: RadialPotential, depth: float) -> RcnWindow:
    """Window (0, exp(-depth)] anchored at the singular center."""
    return RcnWindow(p, 0.0, (0.0, 1.0), "singular_center", depth=float(depth))


def example4_layer(p: RadialPotential, r: float, eps: float) -> RcnWindow:
    """Layer [r, r + eps r^{-alpha}] for a power_infinity minorant."""
    alpha = p.params["alpha"]
    return RcnWindow(p, r, (r, r + eps * r ** -alpha), "infinity_layer")


@dataclass(frozen=True)
class SearchConfig:
    a_points: int = 64
    delta0_min: float = 1e-3
    delta0_max: float = 0.2
    delta0_points: int = 24
    c_points: int = 96
    c_min: float = 1e-4
    c_max: float = 1e4
    samples: int = 64
    safety: float = 1.05
    layer_samples: int = 16
    horizon_layers: int = 40
    epsilon: float = 0.05


@dataclass
class RcnCertificate:
    feasible: bool
    constants: dict
    delta: float
    sup_dual: float
    sup_qtau: float
    necessary_sup: float
    margin: float
    samples: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def relative_bound(A: float, delta0: float) -> float:
    return (A - delta0) / (A + delta0)


def delta_bound(cert: RcnCertificate) -> float:
    if not cert.feasible:
        raise InfeasibleCertificate("certificate is not feasible")
    c = cert.constants
    return relative_bound(c["A"], c["delta0"])


def sample_radii(w: RcnWindow, n: int) -> np.ndarray:
    """Chebyshev-Lobatto radii, dropping ends that are singular or the anchor."""
    lo, hi = w.interval
    k = np.arange(n)
    x = lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.pi * k / (n - 1)))
    x[0], x[-1] = lo, hi
    dlo, dhi = w.potential.domain
    keep = (x > dlo) & (x < dhi) & (x != w.r_ref)
    return np.unique(x[keep])


@dataclass
class NecessaryResult:
    sup: float
    arg_r: float


def _profile(w: RcnWindow, n: int):
    """Sample coordinates plus both left-hand sides on a window."""
    if w.depth is not None:
        L = w.depth * np.geomspace(1.0, 1e6, n)
        prof = log_singular_profile(w.potential, L)
        return {"L": L.tolist()}, np.exp(-L), prof["dual"], prof["qtau"]
    rs = sample_radii(w, n)
    prof = window_profile(w.potential, w.r_ref, rs)
    return {"r": rs.tolist()}, rs, prof["dual"], prof["qtau"]


def necessary_product(w: RcnWindow, samples: int = 64) -> NecessaryResult:
    """sup of q tau^2 |d log w / d tau| (product of the two left-hand sides)."""
    if samples < 16:
        raise ValueError("necessary_product needs at least 16 samples")
    _, rs, dual, qtau = _profile(w, samples)
    prod = dual * qtau
    i = int(np.argmax(prod))
    return NecessaryResult(float(prod[i]), float(rs[i]))


def _grids(cfg: SearchConfig):
    d0 = np.geomspace(cfg.delta0_min, cfg.delta0_max, cfg.delta0_points)
    cs = np.geomspace(cfg.c_min, cfg.c_max, cfg.c_points)
    return d0, cs


def _a_grid(d0: float, n: int) -> np.ndarray:
    return np.linspace(d0, 1.0 - d0, n + 2)[1:-1]


def _frontier(cs):
    """(C0, eps0) pairs not dominated in both condition weights.

    The first condition weighs sup_dual by X = 2 sqrt(1/C0^2 + eps0^2) and the
    second weighs sup_qtau by Y = 2 sqrt(C0^2 + 1/eps0^2); a pair beaten in
    both weights can never give a larger margin.
    """
    C, E = np.meshgrid(cs, cs, indexing="ij")
    X = (2.0 * np.sqrt(1.0 / C ** 2 + E ** 2)).ravel()
    Y = (2.0 * np.sqrt(C ** 2 + 1.0 / E ** 2)).ravel()
    order = np.lexsort((Y, X))
    keep, ymin = [], np.inf
    for k in order:
        if Y[k] < ymin:
            keep.append(k)
            ymin = Y[k]
    keep = np.array(keep)
    return X[keep], Y[keep], C.ravel()[keep], E.ravel()[keep]


_FRONT_CACHE = {}


def _front_for(cs):
    key = (float(cs[0]), float(cs[-1]), len(cs))
    if key not in _FRONT_CACHE:
        _FRONT_CACHE[key] = _frontier(cs)
    return _FRONT_CACHE[key]


def _best_over_ce(D, Q, A, d0, cs):
    """For each A (1-d array), the best relative margin over (C0, eps0)."""
    X, Y, C, E = _front_for(cs)
    A2 = np.asarray(A, dtype=float)[:, None]
    sa = 1.0 - D * X[None, :] / np.sqrt(1.0 - A2 - d0)
    sb = 1.0 - Q * Y[None, :] / np.sqrt(A2 - d0)
    m = np.minimum(sa, sb)
    idx = np.argmax(m, axis=1)
    return m[np.arange(len(A2)), idx], C[idx], E[idx]


def _pick(margins, deltas):
    """Index maximising margin, ties broken by the smaller delta."""
    order = np.lexsort((deltas, -margins))
    return int(order[0])


def _certify_samples(D, Q, cfg, pinned):
    d0s, cs = _grids(cfg)
    cands = []
    if pinned is not None:
        pairs = [(np.array([pinned[0]]), pinned[1])]
    else:
        pairs = [(_a_grid(d0, cfg.a_points), d0) for d0 in d0s]
    for As, d0 in pairs:
        best, c0, e0 = _best_over_ce(D, Q, As, d0, cs)
        for a, b, c, e in zip(As, best, c0, e0):
            cands.append((b, relative_bound(a, d0), a, d0, c, e))
    arr = np.array(cands)
    i = _pick(arr[:, 0], arr[:, 1])
    b, delta, a, d0, c, e = arr[i]
    return float(b), {"C0": float(c), "eps0": float(e), "A": float(a), "delta0": float(d0)}


def certify_window(w: RcnWindow, cfg: SearchConfig = SearchConfig(),
                   pinned: Optional[tuple] = None) -> RcnCertificate:
    """Grid search for RCN constants on a window.

    ``pinned`` fixes (A, delta0) and searches only (C0, eps0).
    """
    if w.kind == "infinity_layer" and w.touches_horizon():
        return _certify_horizon_layer(w, cfg, pinned)
    coords, rs, dual, qtau = _profile(w, cfg.samples)
    sd, sq = float(np.max(dual)), float(np.max(qtau))
    nec = float(np.max(dual * qtau))
    margin, consts = _certify_samples(sd * cfg.safety, sq * cfg.safety, cfg, pinned)
    feasible = bool(margin > 0.0)
    return RcnCertificate(
        feasible=feasible,
        constants=consts,
        delta=relative_bound(consts["A"], consts["delta0"]),
        sup_dual=sd,
        sup_qtau=sq,
        necessary_sup=nec,
        margin=margin,
        samples={**coords, "dual": dual.tolist(), "qtau": qtau.tolist()},
    )


def _certify_horizon_layer(w, cfg, pinned):
    """Window reaching a horizon: (A, delta0) shared, (C0, eps0) per dyadic sub-layer."""
    p = w.potential
    lo, hi = w.interval
    side = w.touches_horizon()
    J = cfg.horizon_layers
    if side == "inner":
        edges = [lo + (hi - lo) * 2.0 ** -j for j in range(J + 1)]
    else:
        edges = [hi - (hi - lo) * 2.0 ** -j for j in range(J + 1)]
    layers = []
    all_r, all_d, all_q = [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        a, b = min(a, b), max(a, b)
        k = np.arange(cfg.layer_samples)
        x = a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * k / (cfg.layer_samples - 1)))
        x = x[(x > p.domain[0]) & (x < p.domain[1]) & (x != w.r_ref)]
        prof = window_profile(p, w.r_ref, x)
        layers.append((a, b, float(np.max(prof["dual"])), float(np.max(prof["qtau"]))))
        all_r.append(x)
        all_d.append(prof["dual"])
        all_q.append(prof["qtau"])
    rs, dual, qtau = (np.concatenate(v) for v in (all_r, all_d, all_q))

    d0s, cs = _grids(cfg)
    pairs = ([(np.array([pinned[0]]), pinned[1])] if pinned is not None
             else [(_a_grid(d0, cfg.a_points), d0) for d0 in d0s])
    best_score, best = -np.inf, None
    for As, d0 in pairs:
        per = [_best_over_ce(sd * cfg.safety, sq * cfg.safety, As, d0, cs)
               for _, _, sd, sq in layers]
        mins = np.min(np.stack([m for m, _, _ in per]), axis=0)
        deltas = relative_bound(As, d0)
        i = _pick(mins, deltas)
        score = (mins[i], -deltas[i])
        if best is None or score > best_score:
            best_score = score
            j = int(np.argmin([m[i] for m, _, _ in per]))
            best = (float(mins[i]), float(As[i]), float(d0), per, i, j)
    margin, a, d0, per, i, j = best
    consts = {"C0": float(per[j][1][i]), "eps0": float(per[j][2][i]), "A": a, "delta0": d0}
    layer_info = [{"r_lo": lay[0], "r_hi": lay[1], "C0": float(pr[1][i]),
                   "eps0": float(pr[2][i]), "margin": float(pr[0][i])}
                  for lay, pr in zip(layers, per)]
    return RcnCertificate(
        feasible=bool(margin > 0.0),
        constants=consts,
        delta=relative_bound(a, d0),
        sup_dual=float(np.max(dual)),
        sup_qtau=float(np.max(qtau)),
        necessary_sup=float(np.max(dual * qtau)),
        margin=margin,
        samples={"r": rs.tolist(), "dual": dual.tolist(), "qtau": qtau.tolist(),
                 "layers": layer_info},
    )


def sweep_constants(target_delta: float):
    """(A, delta0) with A + delta0 = 1/2 and (A - delta0)/(A + delta0) = target."""
    if not 0.0 < target_delta < 1.0:
        raise ValueError("target delta must lie in (0, 1)")
    return (1.0 + target_delta) / 4.0, (1.0 - target_delta) / 4.0


def uniform_delta_sweep(p: RadialPotential, windows: Sequence[RcnWindow], target_delta: float,
                        cfg: SearchConfig = SearchConfig()) -> dict:
    """Certify every window with the same (A, delta0); windows are disjoint or nested."""
    spans = [w.interval for w in windows]
    for i, (a0, b0) in enumerate(spans):
        for a1, b1 in spans[i + 1:]:
            disjoint = b0 <= a1 or b1 <= a0
            nested = (a0 <= a1 and b1 <= b0) or (a1 <= a0 and b0 <= b1)
            if not (disjoint or nested):
                raise ValueError("sweep windows must be disjoint or nested")
    A, d0 = sweep_constants(target_delta)
    rows = []
    for w in windows:
        if w.potential is not p:
            raise ValueError("all sweep windows must share the potential")
        cert = certify_window(w, cfg, pinned=(A, d0))
        rows.append({
            "interval": list(w.interval),
            "feasible": cert.feasible,
            "margin": cert.margin,
            "C0": cert.constants["C0"],
            "eps0": cert.constants["eps0"],
            "sup_dual": cert.sup_dual,
            "sup_qtau": cert.sup_qtau,
            "necessary_sup": cert.necessary_sup,
        })
    return {
        "ok": all(r["feasible"] for r in rows),
        "target_delta": target_delta,
        "A": A,
        "delta0": d0,
        "envelope": math.sqrt(1.0 - 4.0 * d0) / 16.0,
        "windows": rows,
    }
