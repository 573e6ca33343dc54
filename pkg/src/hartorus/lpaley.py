"""Dyadic frequency decomposition on the torus lattice.

The block profile is built by telescoping a smooth cutoff chi (equal to 1
below r=1 and 0 above r=2): eta(r) = chi(r) - chi(2r).  This gives
eta supported in the open annulus (1/2, 2), eta(1) = 1, and an exact
partition of unity sum_j eta(2^-j r) = 1 on every covered dyadic range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import SpectralField
from .grid import TorusGrid


def _smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return a / (a + b)


def chi(r):
    """Smooth radial cutoff: 1 on [0,1], 0 on [2,inf)."""
    r = np.asarray(r, dtype=float)
    return _smooth_step(2.0 - r)


def eta(r):
    """Annulus profile chi(r) - chi(2r); support (1/2, 2), eta(1) = 1."""
    r = np.asarray(r, dtype=float)
    return chi(r) - chi(2.0 * r)


def eta_j(r, j: int):
    return eta(np.asarray(r, dtype=float) * 2.0 ** (-j))


@dataclass(frozen=True)
class LPBlock:
    """One dyadic block: multiplier eta(2^-j |xi|) on the lattice."""

    j: int
    grid: TorusGrid

    @property
    def profile(self) -> np.ndarray:
        return eta_j(self.grid.xi_norm, self.j)

    @property
    def annulus(self) -> tuple:
        return (2.0 ** (self.j - 1), 2.0 ** (self.j + 1))

    @property
    def covered(self) -> bool:
        """Whether the annulus contains at least one lattice frequency."""
        lo, hi = self.annulus
        r = self.grid.xi_norm
        return bool(np.any((r > lo) & (r < hi)))


def _ilog2(x: float) -> float:
    return math.log2(x)


@dataclass(frozen=True)
class LittlewoodPaley:
    """Block family adapted to one grid.

    cover range  : every j whose annulus meets a nonzero lattice frequency;
                   summing these blocks reconstructs any zero-mean field.
    resolvable   : the stricter range with 2^(j-1) >= 2*pi/L and
                   2^(j+1) <= Nyquist; norms are evaluated on it and the
                   mass left outside is reported, never silently dropped.
    """

    grid: TorusGrid

    @property
    def j_cover(self) -> range:
        g = self.grid
        j_lo = math.floor(_ilog2(g.xi_min) + 1e-12)
        j_hi = math.ceil(_ilog2(g.xi_max_abs) - 1e-12)
        return range(j_lo, j_hi + 1)

    @property
    def j_resolvable(self) -> range:
        g = self.grid
        j_min = math.ceil(1.0 + _ilog2(g.xi_min) - 1e-12)
        j_max = math.floor(_ilog2(g.nyquist) - 1.0 + 1e-12)
        return range(j_min, j_max + 1)

    def block(self, j: int) -> LPBlock:
        return LPBlock(j, self.grid)

    def project(self, f: SpectralField, j: int) -> SpectralField:
        """Band-limit a field to block j (zero field if j covers nothing)."""
        return f.apply_multiplier(eta_j(self.grid.xi_norm, j))

    def resolvable(self, j: int) -> bool:
        return j in self.j_resolvable

    def decompose(self, f: SpectralField) -> dict:
        return {j: self.project(f, j) for j in self.j_cover}

    def partition_values(self, js=None) -> np.ndarray:
        """sum_j eta_j on the lattice over the given (default cover) range."""
        js = self.j_cover if js is None else js
        out = np.zeros(self.grid.shape)
        for j in js:
            out = out + eta_j(self.grid.xi_norm, j)
        return out

    def truncated_mass_fraction(self, f: SpectralField) -> float:
        """L2-mass fraction of f sitting where the resolvable partition < 1
        (including the zero mode)."""
        part = self.partition_values(self.j_resolvable)
        w = np.abs(f.coefficients) ** 2
        total = float(np.sum(w))
        if total == 0.0:
            return 0.0
        outside = float(np.sum(w * (part < 1.0 - 1e-12)))
        return outside / total
