"""Command-line front end.

Exit codes: 0 ok, 1 usage or schema error, 2 a mathematical condition failed,
3 numerical failure (BlowUp / NonFiniteValue). Results go to stdout or to
files; diagnostics go to stderr only.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import forms, io, rcn, scenario, spacetimes, wave
from .errors import BlowUp, IndefiniteForm, NonFiniteValue, RcnwaveError
from .geometry import tau_many

OK, USAGE, FAILED, NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}" if self.prog != "rcnwave" else message)


def _emit(obj, out: Optional[str] = None):
    text = io.dumps(obj) + "\n"
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text)


def _emit_csv(header, rows, out: Optional[str] = None):
    text = io.csv_text(header, rows)
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text)


def _load_potential(path):
    doc = scenario.load(path)
    return doc, scenario.build_potential(doc)


# subcommands ---------------------------------------------------------------------

def cmd_tau(a) -> int:
    _, p = _load_potential(a.scenario)
    r_ref = p.default_anchor() if a.r_ref is None else a.r_ref
    rs = np.asarray(a.r_values, dtype=float)
    _emit_csv(["r", "tau"], zip(rs, tau_many(p, r_ref, rs)), a.out)
    return OK


def _window(p, a):
    if a.depth is not None:
        return rcn.log_singular_window(p, a.depth)
    lo, hi = a.window
    kind = a.kind or "singular_center"
    if kind == "infinity_layer" and a.r_ref is None:
        return rcn.infinity_layer(p, lo, hi)
    r_ref = a.r_ref if a.r_ref is not None else (lo if kind == "singular_center" else 0.5 * (lo + hi))
    return rcn.RcnWindow(p, r_ref, (lo, hi), kind)


def cmd_rcn_check(a) -> int:
    _, p = _load_potential(a.scenario)
    if a.window is None and a.depth is None:
        raise UsageError("rcn-check needs --window LO HI or --depth L")
    cert = rcn.certify_window(_window(p, a))
    d = cert.to_dict()
    if not a.samples:
        d.pop("samples", None)
    _emit(d, a.out)
    return OK if cert.feasible else FAILED


def _parse_layers(p, spec: str):
    """'dyadic:K1:K2' (layers toward the marked end) or 'lo:hi,lo:hi,...'."""
    if spec.startswith("dyadic:"):
        try:
            k1, k2 = (int(v) for v in spec.split(":")[1:])
        except ValueError as exc:
            raise UsageError(f"bad --layers {spec!r}") from exc
        lo, hi = p.domain
        out = []
        for k in range(k1, k2 + 1):
            a_, b_ = 2.0 ** -k, 2.0 ** (-k + 1)
            if "horizon_at_outer" in p.markers:
                out.append((hi - b_, hi - a_))
            else:
                out.append((lo + a_, lo + b_))
        return [rcn.infinity_layer(p, x, y) for x, y in out]
    wins = []
    for part in spec.split(","):
        try:
            x, y = (float(v) for v in part.split(":"))
        except ValueError as exc:
            raise UsageError(f"bad layer {part!r}") from exc
        wins.append(rcn.infinity_layer(p, x, y))
    return wins


def cmd_sweep(a) -> int:
    _, p = _load_potential(a.scenario)
    rep = rcn.uniform_delta_sweep(p, _parse_layers(p, a.layers), a.delta)
    _emit(rep, a.out)
    return OK if rep["ok"] else FAILED


def _profile(spec: Optional[Sequence[str]]):
    if spec is None:
        return None
    shape, lo, hi = spec[0], float(spec[1]), float(spec[2])
    return forms.TestProfile(shape, (lo, hi))


def cmd_forms(a) -> int:
    c = a.check
    if c == "hardy":
        f, df = forms.power_profile(a.power)
        rep = forms.hardy_check(f, a.tau0, df)
        rep.update({"power": a.power, "tau0": a.tau0})
        ok = rep["holds"]
    elif c == "self-adjoint":
        rep = forms.self_adjointness_feasible(a.n, a.alpha)
        rep["alpha_boundary"] = forms.alpha_boundary(a.n)
        ok = rep["feasible"]
    elif c == "ims":
        fam = forms.CutoffFamily(a.centers, a.radii, a.tau_eps, tuple(a.region))
        rep = {"ims_error": forms.ims_error(fam)}
        ok = True
    elif c == "nonnegativity":
        if a.profile is not None:
            rep = forms.nonnegativity_check(a.n, a.beta2, _profile(a.profile))
            ok = rep["holds"]
        else:
            r = forms.falsify_nonnegativity(a.n, a.beta2, a.trials)
            rep, ok = r.to_dict(), not r.found
    else:
        if a.scenario is None:
            raise UsageError(f"--check {c} needs --scenario")
        _, p = _load_potential(a.scenario)
        if c == "minorant":
            if a.profile is None or a.delta is None:
                raise UsageError("--check minorant needs --delta and --profile")
            rep = forms.minorant_form_check(p, a.delta, _profile(a.profile))
            ok = rep["holds"]
        else:
            if a.window is None or a.delta is None:
                raise UsageError("--check positivity needs --window and --delta")
            w = _window(p, a)
            if a.profile is not None:
                rep = forms.positivity_check(p, _profile(a.profile), w, a.delta)
                ok = rep["holds"]
            else:
                r = forms.falsify_positivity(p, w, a.delta, a.trials)
                rep, ok = r.to_dict(), not r.found
    _emit({"check": c, "pass": bool(ok), **rep}, a.out)
    return OK if ok else FAILED


def _run_checks(doc, sc, traj):
    reports = []
    for chk in doc.get("checks", []):
        prm = chk.get("params", {})
        t = chk["type"]
        if t == "cone":
            cone = None
            if "tau0" in prm:
                cone = wave.ConeSpec(prm.get("anchor", 0.0), prm["tau0"], prm.get("delta_hat", 0.0))
            reports.append(wave.verify_cone(traj, cone, prm.get("tol", 1e-8), prm.get("speed", 1.0)))
        elif t == "silo":
            layer = tuple(prm["layer"]) if "layer" in prm else None
            rep = wave.verify_silo(traj, layer, prm.get("tol", 1e-8))
            rep.pop("trace")
            reports.append(rep)
        elif t == "energy":
            c = wave.energy_constant(traj)
            e = [r.E_total for r in traj.energies]
            drift = max(abs(x - e[0]) for x in e) / e[0] if e[0] > 0 else 0.0
            bound = prm.get("max_constant", 1.0 + prm.get("drift_tol", 1e-4))
            reports.append({"check": "energy", "pass": bool(c <= bound), "worst_value": c,
                            "worst_location": None, "worst_time": None,
                            "constant": c, "drift": drift})
        else:
            reports.append(wave.excision_check(sc, prm.get("tol", 1e-3)))
    return reports


def cmd_simulate(a) -> int:
    doc = scenario.load(a.scenario)
    sc = scenario.build_wave(doc)
    out = a.out or scenario.output_dir(doc)
    traj = wave.run_wave(sc)
    head = ["r", "tau", "u", "u_t"]
    for k, st in enumerate(traj.states):
        io.write_csv(os.path.join(out, f"snapshot_{k:05d}.csv"), head, wave.snapshot_rows(traj, st))
    io.write_csv(os.path.join(out, "snapshot_times.csv"), ["index", "t"],
                 [(str(k), st.t) for k, st in enumerate(traj.states)])
    io.write_csv(os.path.join(out, "energy.csv"), ["t", "E_total", "E_kinetic", "E_gradient", "E_potential"],
                 wave.energy_rows(traj))
    reports = _run_checks(doc, sc, traj)
    summary = {"dt": traj.dt, "steps": len(traj.energies) - 1, "cells": traj.grid.cells,
               "operator": traj.grid.operator, "coordinate": traj.grid.coordinate,
               "snapshots": len(traj.states), "checks": reports}
    io.write_json(os.path.join(out, "checks.json"), summary)
    _emit(summary)
    return OK if all(r["pass"] for r in reports) else FAILED


def _rho(spec: str):
    """'constant:C', 'power:C:K' or 'pulse:CENTER:WIDTH[:AMP]' in r."""
    parts = spec.split(":")
    try:
        vals = [float(v) for v in parts[1:]]
        if parts[0] == "constant" and len(vals) == 1:
            return lambda r: vals[0] + 0.0 * r
        if parts[0] == "power" and len(vals) == 2:
            return lambda r: vals[0] * np.asarray(r, dtype=float) ** vals[1]
        if parts[0] == "pulse" and len(vals) in (2, 3):
            return wave.gaussian_pulse(*vals)
    except ValueError:
        pass
    raise UsageError(f"bad --rho-spec {spec!r}")


def cmd_dirichlet(a) -> int:
    doc, p = _load_potential(a.scenario)
    g = doc.get("grid")
    if g is None:
        raise UsageError("dirichlet needs a grid section in the scenario")
    grid = wave.build_grid(p, g.get("coordinate", "r"), g["lo"], g["hi"], g["cells"], "schrodinger",
                           g.get("r_ref"))
    res = wave.solve_dirichlet(p, grid, _rho(a.rho_spec))
    _emit_csv(["r", "u"], zip(res["r"], res["u"]), a.out)
    if a.report:
        io.write_json(a.report, {"residual": res["residual"], "form_value": res["form_value"]})
    return OK


def _model(a):
    prm = {}
    for kv in a.param or []:
        k, _, v = kv.partition("=")
        try:
            prm[k] = float(v)
        except ValueError as exc:
            raise UsageError(f"bad --param {kv!r}") from exc
    try:
        return spacetimes.SpacetimeModel(a.model, prm)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_spacetime(a) -> int:
    m = _model(a)
    rs = np.asarray(a.r or [], dtype=float)
    if a.op == "tau":
        _emit_csv(["r", "tau"], zip(rs, np.atleast_1d(spacetimes.spacetime_tau(m, rs, a.case, a.anchor))),
                  a.out)
    elif a.op == "cone":
        if a.vertex is None:
            raise UsageError("--op cone needs --vertex T0 R0")
        _emit_csv(["r", "t_past", "t_future"], spacetimes.light_cone_rows(m, tuple(a.vertex), rs), a.out)
    elif a.op == "regime":
        if m.family != "reissner_nordstrom":
            raise UsageError("--op regime needs --model reissner_nordstrom")
        _emit([{"r": float(r), "case": spacetimes.rn_regime(m.params["m"], m.params["e"], float(r), a.anchor)}
               for r in rs], a.out)
    else:
        _emit([{"r": float(r), "ratio": spacetimes.origin_taylor_ratio(m, float(r))} for r in rs], a.out)
    return OK


def cmd_uncertainty(a) -> int:
    if a.min is not None:
        rep = spacetimes.uncertainty_minimum(a.min)
        rep["min"] = spacetimes.fraction_json(rep["min"])
        rep["arg"] = list(rep["arg"])
        _emit(rep)
        return OK
    if a.n1 is None or a.n2 is None:
        raise UsageError("uncertainty needs --n1 and --n2, or --min N")
    sys.stdout.write(json.dumps(spacetimes.fraction_json(spacetimes.uncertainty(a.n1, a.n2)),
                                separators=(",", ":")) + "\n")
    return OK


def cmd_self_adjoint(a) -> int:
    rep = forms.self_adjointness_feasible(a.n, a.alpha)
    rep["alpha_boundary"] = forms.alpha_boundary(a.n)
    _emit(rep)
    return OK if rep["feasible"] else FAILED


# parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rcnwave", description="RCN certificates and radial wave simulations.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(fn=fn)
        return s

    s = add("tau", cmd_tau, "inner time chart as CSV")
    s.add_argument("--scenario", required=True)
    s.add_argument("--r-values", type=float, nargs="+", required=True)
    s.add_argument("--r-ref", type=float)
    s.add_argument("--out")

    for name, fn in (("rcn-check", cmd_rcn_check),):
        s = add(name, fn, "certify RCN constants on a window")
        s.add_argument("--scenario", required=True)
        s.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
        s.add_argument("--depth", type=float, help="log_singular window (0, exp(-depth)]")
        s.add_argument("--kind", choices=rcn.WINDOW_KINDS)
        s.add_argument("--r-ref", type=float)
        s.add_argument("--samples", action="store_true", help="include sampled profiles")
        s.add_argument("--out")

    s = add("sweep", cmd_sweep, "uniform-delta sweep over layers")
    s.add_argument("--scenario", required=True)
    s.add_argument("--layers", required=True, help="'dyadic:K1:K2' or 'lo:hi,lo:hi,...'")
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--out")

    s = add("forms", cmd_forms, "quadratic form checks")
    s.add_argument("--check", required=True,
                   choices=["hardy", "positivity", "ims", "minorant", "self-adjoint", "nonnegativity"])
    s.add_argument("--scenario")
    s.add_argument("--window", type=float, nargs=2)
    s.add_argument("--depth", type=float)
    s.add_argument("--kind", choices=rcn.WINDOW_KINDS)
    s.add_argument("--r-ref", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--profile", nargs=3, metavar=("SHAPE", "LO", "HI"))
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--tau0", type=float, default=1.0)
    s.add_argument("--power", type=float, default=1.0)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--beta2", type=float, default=0.0)
    s.add_argument("--centers", type=float, nargs="+", default=[0.0])
    s.add_argument("--radii", type=float, nargs="+", default=[1.0])
    s.add_argument("--tau-eps", type=float, default=0.1)
    s.add_argument("--region", type=float, nargs=2, default=[-1.0, 1.0])
    s.add_argument("--out")

    s = add("simulate", cmd_simulate, "run a wave scenario")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", help="output directory (beats RCNWAVE_OUT and outputs.dir)")

    s = add("dirichlet", cmd_dirichlet, "static Dirichlet solve")
    s.add_argument("--scenario", required=True)
    s.add_argument("--rho-spec", required=True, help="constant:C | power:C:K | pulse:CENTER:WIDTH[:AMP]")
    s.add_argument("--out")
    s.add_argument("--report")

    s = add("spacetime", cmd_spacetime, "static spacetime catalog")
    s.add_argument("--model", required=True, choices=spacetimes.FAMILIES)
    s.add_argument("--param", action="append", help="KEY=VALUE")
    s.add_argument("--op", required=True, choices=["tau", "cone", "regime", "taylor"])
    s.add_argument("--r", type=float, nargs="+")
    s.add_argument("--vertex", type=float, nargs=2)
    s.add_argument("--case", type=int)
    s.add_argument("--anchor", choices=["origin", "horizon"], default="origin")
    s.add_argument("--out")

    s = add("uncertainty", cmd_uncertainty, "hydrogen uncertainty product")
    s.add_argument("--n1", type=int)
    s.add_argument("--n2", type=int)
    s.add_argument("--min", type=int)

    s = add("self-adjoint", cmd_self_adjoint, "inverse-square self-adjointness test")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha", type=float, required=True)
    return ap


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    try:
        a = build_parser().parse_args(argv)
        if getattr(a, "fn", None) is None:
            raise UsageError("a subcommand is required")
        return a.fn(a)
    except (BlowUp, NonFiniteValue) as exc:
        print(f"rcnwave: numerical failure: {exc}", file=sys.stderr)
        return NUMERIC
    except IndefiniteForm as exc:
        print(f"rcnwave: {exc}", file=sys.stderr)
        return FAILED
    except (UsageError, RcnwaveError, ValueError) as exc:
        print(f"rcnwave: {exc}", file=sys.stderr)
        return USAGE
    except SystemExit as exc:  # --help
        return OK if not exc.code else USAGE


def main() -> None:
    sys.exit(run_cli())
