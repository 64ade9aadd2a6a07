"""Explicit radial wave solver, energies, support checks and the static Dirichlet solve.

A grid in coordinate x (r or tau) carries a node measure m_i and a face
stiffness K_{i+1/2}, so that

    (A u)_i = [K_{i+1/2}(u_{i+1} - u_i) - K_{i-1/2}(u_i - u_{i-1})] / m_i

and u_tt = A u - W u + rho. Two operators are available:

* ``schrodinger``: the Laplacian of the spatial metric, weights
  sqrt(g_rr) sigma^2 dr and |grad u|^2 = u_r^2/g_rr, W = V.
* ``lorentzian``: the wave operator of -q dt^2 + q dtau^2 + r^2 dOmega^2,
  weights sigma^2 dtau with unit tau-speed, W = q V.

Black-hole kinds default to ``lorentzian`` (their characteristic speed in
tau is 1, whereas the spatial Laplacian has tau-speed q^{-1/2}, which is
unbounded at a horizon).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .errors import BlowUp, DegenerateCell, IndefiniteForm, NonFiniteValue, OutOfDomain
from .geometry import RadialPotential, closed_form_tau, invert_many, tau_many

BLACK_HOLES = ("schwarzschild", "reissner_nordstrom", "de_sitter")
BLOWUP = 1e12


# grids -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Grid:
    """Nodes of a radial grid with its discrete measure and stiffness."""

    coordinate: str
    x: np.ndarray
    r: np.ndarray
    tau: np.ndarray        # signed inner time at nodes, increasing with x
    mass: np.ndarray       # node measure m_i
    stiff: np.ndarray      # face weights K_{i+1/2} (length cells)
    wfac: np.ndarray       # potential factor W_i at nodes
    speed: np.ndarray      # tau-speed at faces
    operator: str
    orientation: float     # +1 when x grows with r

    @property
    def cells(self) -> int:
        return self.x.size - 1

    @property
    def dtau(self) -> np.ndarray:
        return np.diff(self.tau)

    def x_of_r(self, r: float) -> float:
        """Grid coordinate of a radius (interpolated along the nodes)."""
        rs, xs = (self.r, self.x) if self.orientation > 0 else (self.r[::-1], self.x[::-1])
        if not rs[0] <= r <= rs[-1]:
            raise OutOfDomain(f"r={r} outside the grid")
        return float(np.interp(r, rs, xs))


def _tau_rel(p: RadialPotential, r_ref: float, r):
    if p.closed_form is not None:
        return np.asarray(closed_form_tau(p, r_ref, r), dtype=float)
    return tau_many(p, r_ref, r)


def default_operator(p: RadialPotential) -> str:
    return "lorentzian" if p.kind in BLACK_HOLES else "schrodinger"


def default_coordinate(p: RadialPotential) -> str:
    return "tau" if p.kind in BLACK_HOLES else "r"


def build_grid(p: RadialPotential, coordinate: str, lo: float, hi: float, cells: int,
               operator: Optional[str] = None, r_ref: Optional[float] = None,
               v_default_minus_q: bool = True) -> Grid:
    """Uniform grid in r or in oriented inner time.

    On a tau grid x = s (tau(r) - tau(r_ref)) with s = -1 when the inner end
    is a horizon, so x always grows toward the horizon or the outer end.
    """
    operator = operator or default_operator(p)
    if operator not in ("schrodinger", "lorentzian"):
        raise ValueError(f"unknown operator {operator!r}")
    if coordinate not in ("r", "tau"):
        raise ValueError("grid coordinate must be 'r' or 'tau'")
    if not (cells >= 2 and int(cells) == cells):
        raise ValueError("grid needs at least 2 cells")
    if not (hi > lo):
        raise ValueError("grid must be monotone (hi > lo)")
    cells = int(cells)
    r_ref = p.default_anchor() if r_ref is None else float(r_ref)
    dlo, dhi = p.domain
    x = np.linspace(lo, hi, cells + 1)
    xh = 0.5 * (x[:-1] + x[1:])
    if coordinate == "r":
        if lo < dlo or hi > dhi:
            raise OutOfDomain(f"r grid [{lo}, {hi}] outside domain [{dlo}, {dhi}]")
        s = 1.0
        r, rh = x, xh
        tau = _tau_rel(p, r_ref, r)
    else:
        s = -1.0 if "horizon_at_inner" in p.markers else 1.0
        targets = s * np.concatenate([x, xh])
        both = invert_many(p, r_ref, targets, dlo, _finite_hi(p, r_ref, float(np.max(targets))))
        r, rh = both[: x.size], both[x.size:]
        tau = x.copy()
    # deep in a horizon layer r rounds to the horizon radius; the lorentzian
    # tau weights stay finite there, so saturated radii are allowed for it
    strict = coordinate == "r" or operator == "schrodinger"
    dr = np.diff(r) * s
    if np.any(dr < 0) or (strict and np.any(dr == 0)) or not np.all(np.isfinite(r)):
        raise DegenerateCell("grid radii are not monotone")

    with np.errstate(divide="ignore", invalid="ignore"):
        if coordinate == "r" and operator == "schrodinger":
            w = np.sqrt(p.g_rr(r)) * p.sigma2(r)
            k = p.sigma2(rh) / np.sqrt(p.g_rr(rh))
            speed = p.tau_density(rh) / np.sqrt(p.g_rr(rh))
        elif coordinate == "r":
            w = p.sigma2(r) * p.tau_density(r)
            k = p.sigma2(rh) / p.tau_density(rh)
            speed = np.ones_like(rh)
        elif operator == "schrodinger":
            w = np.sqrt(p.q(r)) * p.sigma2(r)
            k = p.sigma2(rh) / np.sqrt(p.q(rh))
            speed = 1.0 / np.sqrt(p.q(rh))
        else:
            w = p.sigma2(r)
            k = p.sigma2(rh)
            speed = np.ones_like(rh)
        wfac = _potential(p, r, v_default_minus_q)
        if operator == "lorentzian":
            wfac = p.q(r) * wfac
        h = np.diff(x)
        mass = w * np.concatenate([[h[0]], h[:-1] + h[1:], [h[-1]]]) / 2.0
        stiff = k / h
    # boundary nodes may sit where the weights vanish (origin, horizon); they are Dirichlet
    mass[[0, -1]] = np.where(np.isfinite(mass[[0, -1]]), mass[[0, -1]], 0.0)
    wfac[[0, -1]] = np.where(np.isfinite(wfac[[0, -1]]), wfac[[0, -1]], 0.0)
    if not (np.all(np.isfinite(mass[1:-1])) and np.all(mass[1:-1] > 0)
            and np.all(np.isfinite(stiff)) and np.all(np.isfinite(wfac[1:-1]))):
        raise DegenerateCell("non-finite or zero weights inside the grid")
    return Grid(coordinate, x, r, np.asarray(tau, dtype=float), mass, stiff, wfac,
                speed, operator, s)


def _finite_hi(p: RadialPotential, r_ref: float, target: float) -> float:
    """A finite upper bracket for the chart inversion."""
    hi = p.domain[1]
    if math.isfinite(hi):
        return hi
    b = max(2.0 * abs(r_ref), r_ref + 1.0)
    while float(_tau_rel(p, r_ref, np.array([b]))[0]) < target:
        b = 2.0 * b
    return b


def _potential(p: RadialPotential, r, v_default_minus_q: bool):
    """V = V_+ - V_-, with V_- = q for black holes when nothing is configured."""
    if (v_default_minus_q and p.kind in BLACK_HOLES and not p.v_minus_equals_q
            and p.v_minus is None):
        return p.v_plus_of(r) - p.q(r)
    return p.potential(r)


# scenario and state ----------------------------------------------------------

@dataclass
class WaveScenario:
    potential: RadialPotential
    lo: float
    hi: float
    cells: int
    t_end: float
    coordinate: Optional[str] = None
    cfl_fraction: float = 0.5
    u0: Optional[Callable] = None
    v0: Optional[Callable] = None
    source: Optional[Callable] = None      # rho(t, r)
    inner: str = "dirichlet_zero"
    outer: str = "dirichlet_zero"
    r_cut_inner: Optional[float] = None
    r_cut_outer: Optional[float] = None
    snapshot_every: int = 1
    operator: Optional[str] = None
    r_ref: Optional[float] = None
    v_default_minus_q: bool = True
    profile_coordinate: str = "grid"       # u0/v0 take grid x ("grid") or radius ("r")

    def __post_init__(self):
        if not (0.0 < self.cfl_fraction < 1.0):
            raise ValueError("cfl_fraction must lie in (0, 1)")
        if not (self.t_end >= 0):
            raise ValueError("t_end must be nonnegative")
        for side, kind, cut in (("inner", self.inner, self.r_cut_inner),
                                ("outer", self.outer, self.r_cut_outer)):
            if kind not in ("dirichlet_zero", "excised_cutoff"):
                raise ValueError(f"unknown {side} boundary {kind!r}")
            if kind == "excised_cutoff" and cut is None:
                raise ValueError(f"{side} excised_cutoff needs r_cut")
        if self.coordinate is None:
            self.coordinate = default_coordinate(self.potential)
        if self.operator is None:
            self.operator = default_operator(self.potential)
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")

    def grid(self) -> Grid:
        lo, hi, cells = self.lo, self.hi, self.cells
        h = (hi - lo) / cells
        if self.inner == "excised_cutoff":
            lo = self._cut(self.r_cut_inner)
        if self.outer == "excised_cutoff":
            hi = self._cut(self.r_cut_outer)
        if lo != self.lo or hi != self.hi:
            cells = max(2, int(round((hi - lo) / h)))
        return build_grid(self.potential, self.coordinate, lo, hi, cells, self.operator,
                          self.r_ref, self.v_default_minus_q)

    def _cut(self, r_cut):
        if self.coordinate == "r":
            return float(r_cut)
        p = self.potential
        r_ref = p.default_anchor() if self.r_ref is None else self.r_ref
        s = -1.0 if "horizon_at_inner" in p.markers else 1.0
        return float(s * _tau_rel(p, r_ref, np.array([r_cut]))[0])


@dataclass
class WaveState:
    t: float
    u: np.ndarray
    ut: np.ndarray


@dataclass
class EnergyRecord:
    t: float
    E_total: float
    E_kinetic: float
    E_gradient: float
    E_potential: float


@dataclass
class Trajectory:
    scenario: WaveScenario
    grid: Grid
    dt: float
    states: list
    energies: list
    source_integral: list = field(default_factory=list)   # int_0^t int rho^2 dmu dt'

    @property
    def u0_peak(self) -> float:
        s0 = self.states[0]
        return float(max(np.max(np.abs(s0.u)), np.max(np.abs(s0.ut))))


@dataclass(frozen=True)
class ConeSpec:
    """Backward cone around ``anchor`` (grid tau) with base radius tau0."""

    anchor: float
    tau0: float
    delta_hat: float
    delta: float = 0.0

    def __post_init__(self):
        if not (self.delta <= self.delta_hat < 1):
            raise ValueError("need delta <= delta_hat < 1")

    @property
    def T_hat(self) -> float:
        return math.sqrt(1 - self.delta_hat) * self.tau0

    @property
    def T(self) -> float:
        return math.sqrt(1 - self.delta) * self.tau0


def gaussian_pulse(center: float, width: float, amplitude: float = 1.0) -> Callable:
    """Gaussian on (center - width/2, center + width/2), zero outside.

    The variance is chosen so the value at the cut is 1e-16 of the peak, which
    keeps the data grid-smooth: a C-infinity bump with steep flanks leaks
    about 1e-5 of its peak ahead of the discrete front.
    """
    half = 0.5 * float(width)
    s = half / math.sqrt(math.log(1e16))

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x - center) < half, amplitude * np.exp(-((x - center) / s) ** 2), 0.0)

    return f


# stepping --------------------------------------------------------------------

def cfl_dt(scenario_or_grid, cfl_fraction: Optional[float] = None) -> float:
    """nu * min over cells of the tau-width, divided by the local tau-speed when it exceeds 1."""
    if isinstance(scenario_or_grid, WaveScenario):
        grid = scenario_or_grid.grid()
        nu = scenario_or_grid.cfl_fraction if cfl_fraction is None else cfl_fraction
    else:
        grid, nu = scenario_or_grid, (0.5 if cfl_fraction is None else cfl_fraction)
    d = grid.dtau
    if np.any(~np.isfinite(d)) or np.any(d <= 0):
        raise DegenerateCell("a cell has zero or non-finite inner time width")
    return float(nu * np.min(d / np.maximum(1.0, grid.speed)))


def apply_A(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Interior values of the discrete operator A u (boundary entries 0)."""
    flux = grid.stiff * np.diff(u)
    out = np.zeros_like(u)
    out[1:-1] = (flux[1:] - flux[:-1]) / grid.mass[1:-1]
    return out


def _sample(fn, grid: Grid, coord: str, t=None):
    if fn is None:
        return np.zeros_like(grid.x)
    arg = grid.r if coord == "r" else grid.x
    v = fn(arg) if t is None else fn(t, grid.r)
    return np.asarray(v, dtype=float) * np.ones_like(grid.x)


def energies(grid: Grid, t: float, u, ut, mask=None) -> EnergyRecord:
    """Discrete energy with the solver's own measure; ``mask`` restricts to a node set."""
    m = grid.mass if mask is None else grid.mass * mask
    fm = np.ones(grid.cells) if mask is None else (mask[:-1] * mask[1:])
    ek = 0.5 * float(np.sum(m * ut * ut))
    eg = 0.5 * float(np.sum(fm * grid.stiff * np.diff(u) ** 2))
    ep = 0.5 * float(np.sum(m * grid.wfac * u * u))
    return EnergyRecord(t, ek + eg + ep, ek, eg, ep)


def run_wave(sc: WaveScenario) -> Trajectory:
    """Position-Verlet leapfrog to t_end with Dirichlet ends."""
    grid = sc.grid()
    dt_max = cfl_dt(grid, sc.cfl_fraction)
    steps = max(1, math.ceil(sc.t_end / dt_max - 1e-12)) if sc.t_end > 0 else 0
    dt = sc.t_end / steps if steps else dt_max
    u = _sample(sc.u0, grid, sc.profile_coordinate)
    v = _sample(sc.v0, grid, sc.profile_coordinate)
    u[[0, -1]] = 0.0
    v[[0, -1]] = 0.0
    src = (lambda t: _sample(sc.source, grid, "r", t)) if sc.source is not None else None
    wfac = grid.wfac

    states = [WaveState(0.0, u.copy(), v.copy())]
    recs = [energies(grid, 0.0, u, v)]
    acc = [0.0]
    rho_prev = src(0.0) if src else None
    for n in range(steps):
        t1 = (n + 1) * dt
        uh = u + 0.5 * dt * v
        force = apply_A(grid, uh) - wfac * uh
        if src:
            rho_next = src(t1)
            force += 0.5 * (rho_prev + rho_next)
            acc.append(acc[-1] + 0.5 * dt * float(np.sum(grid.mass * (rho_prev ** 2 + rho_next ** 2))))
            rho_prev = rho_next
        else:
            acc.append(acc[-1])
        force[[0, -1]] = 0.0
        v = v + dt * force
        u = uh + 0.5 * dt * v
        peak = np.max(np.abs(u))
        if not np.isfinite(peak) or not np.all(np.isfinite(v)):
            raise NonFiniteValue(f"non-finite field at t={t1}")
        if peak > BLOWUP:
            raise BlowUp(f"|u| = {peak:.3g} at t={t1}")
        recs.append(energies(grid, t1, u, v))
        if (n + 1) % sc.snapshot_every == 0 or n + 1 == steps:
            states.append(WaveState(t1, u.copy(), v.copy()))
    return Trajectory(sc, grid, dt, states, recs, acc)


def energy_slice(traj_or_grid, state: WaveState, cone: Optional[ConeSpec] = None) -> EnergyRecord:
    """Energy over {x : t + (1 - delta_hat)^{1/2} |tau(x) - anchor| < T_hat}, or the full grid."""
    grid = traj_or_grid.grid if isinstance(traj_or_grid, Trajectory) else traj_or_grid
    if cone is None:
        return energies(grid, state.t, state.u, state.ut)
    d = np.abs(grid.tau - cone.anchor)
    mask = (state.t + math.sqrt(1 - cone.delta_hat) * d < cone.T_hat).astype(float)
    return energies(grid, state.t, state.u, state.ut, mask)


# verification ------------------------------------------------------------------

def _support(traj: Trajectory, tol=0.0):
    """tau-range of nodes where the data exceeds tol * peak."""
    s0 = traj.states[0]
    cut = tol * traj.u0_peak
    nz = np.nonzero((np.abs(s0.u) > cut) | (np.abs(s0.ut) > cut))[0]
    if nz.size == 0:
        return None
    tau = traj.grid.tau
    return float(tau[nz[0]]), float(tau[nz[-1]])


def _report(check, ok, worst, loc, when, **extra):
    out = {"check": check, "pass": bool(ok), "worst_value": float(worst),
           "worst_location": None if loc is None else float(loc),
           "worst_time": None if when is None else float(when)}
    out.update(extra)
    return out


def verify_cone(traj: Trajectory, cone: Optional[ConeSpec] = None, tol: float = 1e-8,
                speed: float = 1.0) -> dict:
    """sup |u| outside the support's light cone (speed ``speed`` in tau) dilated by two cells.

    With a ConeSpec the base is the cone's base |tau - anchor| <= tau0 instead of
    the data support.
    """
    grid = traj.grid
    pad = 2.0 * float(np.max(grid.dtau))
    if cone is not None:
        edges = (cone.anchor - cone.tau0, cone.anchor + cone.tau0)
    else:
        edges = _support(traj, 1e-16)
    peak = traj.u0_peak
    if edges is None:
        return _report("cone", True, 0.0, None, None, max_exterior=0.0)
    worst, loc, when = 0.0, None, None
    for st in traj.states:
        reach = speed * st.t + pad
        ext = (grid.tau > edges[1] + reach) | (grid.tau < edges[0] - reach)
        if np.any(ext):
            a = np.abs(st.u) * ext
            i = int(np.argmax(a))
            if a[i] > worst or loc is None:
                worst, loc, when = float(a[i]), float(grid.tau[i]), st.t
    ok = worst <= tol * peak
    return _report("cone", ok, worst, loc, when, max_exterior=worst, relative=worst / peak if peak else 0.0)


def verify_silo(traj: Trajectory, layer=None, tol: float = 1e-8) -> dict:
    """Boundary amplitudes of a layer stay below tol * peak until unit-speed travel can reach them.

    ``layer`` is an (x_lo, x_hi) pair of grid coordinates, an RcnWindow, or
    None for the whole grid.
    """
    grid = traj.grid
    x_lo, x_hi = _layer_bounds(grid, layer)
    sup = _support(traj)
    peak = traj.u0_peak
    if sup is None:
        return _report("silo", True, 0.0, None, None, trace=[])
    h = float(np.max(grid.dtau))
    pad = 2.0 * h
    # boundary bands of two cells on each side
    bands = {"lo": (grid.tau >= x_lo - 1e-12) & (grid.tau <= x_lo + pad),
             "hi": (grid.tau <= x_hi + 1e-12) & (grid.tau >= x_hi - pad)}
    dist = {"lo": sup[0] - (x_lo + pad), "hi": (x_hi - pad) - sup[1]}
    trace = []
    ok = all(d > 0 for d in dist.values())
    worst, loc, when = 0.0, None, None
    for st in traj.states:
        row = {"t": st.t}
        for side, band in bands.items():
            amp = float(np.max(np.abs(st.u[band]))) if np.any(band) else 0.0
            row[side] = amp
            if st.t < dist[side]:
                if amp > worst or loc is None:
                    worst, loc, when = amp, (x_lo if side == "lo" else x_hi), st.t
                if amp > tol * peak:
                    ok = False
        trace.append(row)
    return _report("silo", ok, worst, loc, when, trace=trace, distance=dist)


def _layer_bounds(grid: Grid, layer):
    if layer is None:
        return float(grid.tau[0]), float(grid.tau[-1])
    if isinstance(layer, (tuple, list)):
        return float(layer[0]), float(layer[1])
    lo, hi = layer.interval
    xs = []
    for r in (lo, hi):
        if r <= grid.r.min():
            xs.append(grid.tau[0] if grid.orientation > 0 else grid.tau[-1])
        elif r >= grid.r.max():
            xs.append(grid.tau[-1] if grid.orientation > 0 else grid.tau[0])
        else:
            xs.append(grid.x_of_r(r))
    return float(min(xs)), float(max(xs))


def l2_norm(grid: Grid, u) -> float:
    return math.sqrt(float(np.sum(grid.mass * u * u)))


def excision_check(sc: WaveScenario, tol: float = 1e-3) -> dict:
    """Rerun with the inner cut halved and compare final-time L2 norms."""
    if sc.inner != "excised_cutoff":
        raise ValueError("scenario has no inner excision")
    a = run_wave(replace(sc, snapshot_every=10 ** 9))
    b = run_wave(replace(sc, r_cut_inner=0.5 * sc.r_cut_inner, snapshot_every=10 ** 9))
    na, nb = l2_norm(a.grid, a.states[-1].u), l2_norm(b.grid, b.states[-1].u)
    rel = abs(na - nb) / max(na, 1e-300)
    return {"check": "excision", "pass": bool(rel <= tol), "worst_value": rel,
            "worst_location": sc.r_cut_inner, "worst_time": sc.t_end, "norm": na, "norm_halved": nb}


def energy_constant(traj: Trajectory) -> float:
    """Smallest C with E(t) <= C (E(0) + int_0^t int rho^2) along the run."""
    e0 = traj.energies[0].E_total
    c = 0.0
    for rec, s in zip(traj.energies, traj.source_integral):
        base = e0 + s
        if base > 0:
            c = max(c, rec.E_total / base)
    return c


# static Dirichlet problem -------------------------------------------------------

def solve_dirichlet(p: RadialPotential, grid, rho) -> dict:
    """Solve (-A + V) u = rho with zero boundary values through a banded Cholesky factorisation.

    ``grid`` is a Grid or a (coordinate, lo, hi, cells) tuple.
    """
    if not isinstance(grid, Grid):
        coordinate, lo, hi, cells = grid
        grid = build_grid(p, coordinate, lo, hi, cells, "schrodinger")
    m = grid.mass[1:-1]
    K = grid.stiff
    diag = K[:-1] + K[1:] + m * grid.wfac[1:-1]
    off = -K[1:-1]
    f = np.asarray(rho(grid.r) if callable(rho) else rho, dtype=float) * np.ones_like(grid.r)
    b = m * f[1:-1]
    ab = np.zeros((2, diag.size))
    ab[0, 1:] = off
    ab[1] = diag
    try:
        c = linalg.cholesky_banded(ab, lower=False)
    except linalg.LinAlgError as exc:
        raise IndefiniteForm(f"discrete form is not positive definite: {exc}") from exc
    inner = linalg.cho_solve_banded((c, False), b)
    u = np.zeros_like(grid.r)
    u[1:-1] = inner
    Su = diag * inner
    Su[1:] += off * inner[:-1]
    Su[:-1] += off * inner[1:]
    bn = float(np.linalg.norm(b))
    res = float(np.linalg.norm(Su - b)) / (bn if bn > 0 else 1.0)
    form = float(np.sum(K * np.diff(u) ** 2) + np.sum(grid.mass * grid.wfac * u * u))
    return {"r": grid.r, "u": u, "residual": res, "form_value": form, "grid": grid}


# output rows ----------------------------------------------------------------------

def snapshot_rows(traj: Trajectory, state: WaveState):
    g = traj.grid
    return [(float(r), float(t), float(a), float(b)) for r, t, a, b in zip(g.r, g.tau, state.u, state.ut)]


def energy_rows(traj: Trajectory):
    return [(e.t, e.E_total, e.E_kinetic, e.E_gradient, e.E_potential) for e in traj.energies]
