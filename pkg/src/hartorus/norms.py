"""Lebesgue, Sobolev, dyadic-block and Bernstein-type norms on torus fields.

Quadrature is the lattice sum times the cell volume; L-infinity is the
lattice maximum.  The two-exponent block norm uses exponent s on blocks
j < 0 and t on blocks j >= 0, both restricted to the grid's resolvable
dyadic range.
"""

from __future__ import annotations

import math

import numpy as np

from .field import SpectralField
from .lpaley import LittlewoodPaley


def lebesgue_norm(f: SpectralField, p) -> float:
    vals = np.abs(f.values)
    if p == math.inf or p == "inf":
        return float(np.max(vals))
    p = float(p)
    if p < 1:
        raise ValueError(f"p={p} must be >= 1")
    return float((np.sum(vals ** p) * f.grid.dx) ** (1.0 / p))


def sobolev_norm(f: SpectralField, s: float, p=2) -> float:
    """Bessel-potential norm: apply <xi>^s in frequency, then L^p."""
    weight = (1.0 + f.grid.xi_squared) ** (s / 2.0)
    return lebesgue_norm(f.apply_multiplier(weight), p)


def besov_norm(f: SpectralField, p, s: float, t: float, lp: LittlewoodPaley | None = None) -> float:
    lp = lp or LittlewoodPaley(f.grid)
    if len(lp.j_resolvable) == 0:
        raise ValueError(f"grid N={f.grid.N}, L={f.grid.L} resolves no dyadic block")
    acc = 0.0
    for j in lp.j_resolvable:
        nj = lebesgue_norm(lp.project(f, j), p)
        w = 2.0 ** (2 * j * s) if j < 0 else 2.0 ** (2 * j * t)
        acc += w * nj * nj
    return math.sqrt(acc)


def bernstein_ratio(f: SpectralField, j: int, a, b, lp: LittlewoodPaley | None = None) -> float:
    """||f_j||_a / (2^{jd(1/b-1/a)} ||f_j||_b); NaN flags a zero block."""
    av = math.inf if a == math.inf else float(a)
    bv = math.inf if b == math.inf else float(b)
    if not (av >= bv >= 1):
        raise ValueError("need a >= b >= 1")
    lp = lp or LittlewoodPaley(f.grid)
    fj = lp.project(f, j)
    na = lebesgue_norm(fj, a)
    nb = lebesgue_norm(fj, b)
    if nb == 0.0:
        return math.nan
    inv_a = 0.0 if a == math.inf else 1.0 / float(a)
    inv_b = 0.0 if b == math.inf else 1.0 / float(b)
    scale = 2.0 ** (j * f.grid.d * (inv_b - inv_a))
    return na / (scale * nb)
