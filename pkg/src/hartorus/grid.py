"""Periodic torus discretization: lattices in space and frequency."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Uniform lattice on the torus [0, L)^d with its dual frequency lattice.

    Frequencies are xi_k = (2*pi/L)*k for integer k in [-N/2, N/2), stored
    in FFT order along every axis.
    """

    d: int
    L: float
    N: int

    def __post_init__(self):
        if not 1 <= self.d <= 4:
            raise ValueError(f"dimension d={self.d} outside supported range 1..4")
        if self.L <= 0:
            raise ValueError(f"box length L={self.L} must be positive")
        if not _is_power_of_two(self.N):
            raise ValueError(f"points per axis N={self.N} must be a power of two")

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def dx(self) -> float:
        """Physical cell volume."""
        return (self.L / self.N) ** self.d

    @property
    def dxi(self) -> float:
        """Frequency cell volume (2*pi/L)^d."""
        return (2 * np.pi / self.L) ** self.d

    @property
    def volume(self) -> float:
        return self.L ** self.d

    @property
    def xi_min(self) -> float:
        """Smallest nonzero frequency magnitude, 2*pi/L."""
        return 2 * np.pi / self.L

    @property
    def nyquist(self) -> float:
        """Per-axis Nyquist frequency (N/2)*(2*pi/L)."""
        return (self.N // 2) * 2 * np.pi / self.L

    @cached_property
    def x_axis(self) -> np.ndarray:
        return self.L * np.arange(self.N) / self.N

    @cached_property
    def xi_axis(self) -> np.ndarray:
        """Per-axis frequencies in FFT order."""
        k = np.fft.fftfreq(self.N, d=1.0 / self.N)  # integers 0..N/2-1, -N/2..-1
        return (2 * np.pi / self.L) * k

    @cached_property
    def x_vectors(self) -> tuple:
        axes = [self.x_axis] * self.d
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def xi_vectors(self) -> tuple:
        axes = [self.xi_axis] * self.d
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def xi_squared(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for comp in self.xi_vectors:
            out += comp * comp
        out.flags.writeable = False
        return out

    @cached_property
    def xi_norm(self) -> np.ndarray:
        out = np.sqrt(self.xi_squared)
        out.flags.writeable = False
        return out

    @property
    def xi_max_abs(self) -> float:
        """Largest frequency magnitude present on the lattice."""
        return float(np.sqrt(self.d) * self.nyquist)

    @property
    def recurrence_time(self) -> float:
        """Free-flow refocusing time scale L^2/(4*pi)."""
        return self.L ** 2 / (4 * np.pi)

    def symbol_from_radial(self, fn) -> np.ndarray:
        """Sample a radial symbol fn(|xi|) on the frequency lattice."""
        return np.asarray(fn(self.xi_norm))

    def nearest_lattice_xi(self, target) -> np.ndarray:
        """Snap a frequency vector to the nearest lattice point."""
        target = np.atleast_1d(np.asarray(target, dtype=float))
        if target.shape != (self.d,):
            raise ValueError(f"expected a {self.d}-vector, got shape {target.shape}")
        step = 2 * np.pi / self.L
        k = np.rint(target / step)
        half = self.N // 2
        k = np.clip(k, -half, half - 1)
        return k * step
