"""Closed-form inner time antiderivatives for the cataloged metrics.

All functions accept floats or numpy arrays. Each returns the antiderivative
with the additive constant used by the catalog, so differences between two
radii are anchor independent.
"""
from __future__ import annotations

import numpy as np


def minkowski(r, c=1.0):
    return np.asarray(r, dtype=float) / c


def power_singular(r, alpha, beta):
    r = np.asarray(r, dtype=float)
    return r ** (alpha + 1.0) / (beta * (alpha + 1.0))


def power_infinity(r, alpha, beta):
    r = np.asarray(r, dtype=float)
    if alpha == 1.0:
        return np.log(r) / beta
    return r ** (1.0 - alpha) / (beta * (1.0 - alpha))


def schwarzschild(r, m, c=1.0):
    # c^{-1} * integral of r/(r - 2m); the log enters with a plus sign
    d = np.asarray(r, dtype=float) - 2.0 * m
    return (d + 2.0 * m * np.log(d)) / c


def de_sitter(r, ell):
    return ell * np.arctanh(np.asarray(r, dtype=float) / ell)


def coulomb(r):
    return 2.0 / 3.0 * np.asarray(r, dtype=float) ** 1.5


def spectrum_hydrogen(r, level):
    return level * np.asarray(r, dtype=float) ** 2


def rn_horizons(m, e):
    """Return (r_minus, r_plus) for m^2 > e^2, computed without cancellation."""
    s = np.sqrt(m * m - e * e)
    rp = m + s
    return e * e / rp, rp


def reissner_nordstrom(case, r, m, e):
    r = np.asarray(r, dtype=float)
    if case in (1, 2, 3):
        rm, rp = rn_horizons(m, e)
        a = rp * rp / (rp - rm)
        b = rm * rm / (rp - rm)
        if case == 1:
            return r + a * np.log1p(-r / rp) - b * np.log1p(-r / rm)
        if case == 2:
            return r + a * np.log(rp - r) - b * np.log(rm - r)
        return r + a * np.log(r - rp) - b * np.log(r - rm)
    if case == 4:
        return r + m * np.log((1.0 - r / m) ** 2) + m * r / (m - r)
    if case in (5, 6):
        # case 6 carries m^2/(m - r), the sign that differentiates back to 1/f
        return r + m * np.log((r - m) ** 2) + m * m / (m - r)
    if case == 7:
        k = np.sqrt(e * e - m * m)
        arg = r * r / (e * e) - 2.0 * m * r / (e * e) + 1.0
        return (r + m * np.log(arg)
                + (2.0 * m * m - e * e) / k * (np.arctan(m / k) + np.arctan((r - m) / k)))
    raise ValueError(f"unknown Reissner-Nordstrom case {case}")
