"""Momentum distributions, interaction potentials, and the covariance profile.

The covariance profile h is the transform of the squared distribution
WITHOUT the (2*pi)^-d prefactor:

    h(x) = integral over R^d of |f(xi)|^2 e^{i xi.x} d xi,

reduced to a radial integral with the exact angular kernel for each
dimension (cosine for d=1, J0 for d=2, spherical sinc for d=3, J1-type
for d=4).  One convention is fixed package-wide; the equilibrium residual
and the response cross-checks validate it operationally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import gamma, j0, j1


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1}."""
    return 2 * math.pi ** (d / 2) / gamma(d / 2)


# ---------------------------------------------------------------------------
# distribution functions


@dataclass(frozen=True)
class DistributionFunction:
    """Radial momentum distribution; f2(r) evaluates |f|^2 at radius r."""

    kind: str
    T: float = 1.0
    mu: float = 0.0
    profile: Optional[Callable] = None
    support_hint: Optional[float] = None

    def __post_init__(self):
        if self.kind == "bose":
            if self.mu >= 0:
                raise ValueError("bose distribution requires mu < 0 (no pole)")
            if self.T <= 0:
                raise ValueError("bose distribution requires T > 0")
        elif self.kind == "fermi":
            if self.T <= 0:
                raise ValueError("fermi distribution requires T > 0")
        elif self.kind == "zero_temp_fermi":
            if self.mu <= 0:
                raise ValueError("zero-temperature fermi requires mu > 0")
        elif self.kind == "custom":
            if self.profile is None:
                raise ValueError("custom distribution needs a radial profile")
        elif self.kind != "zero":
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    def f2(self, r):
        """|f(r)|^2, vectorized and overflow-safe."""
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "custom":
            return np.maximum(np.asarray(self.profile(r), dtype=float), 0.0)
        z = (r * r - self.mu) / self.T if self.kind in ("bose", "fermi") else None
        if self.kind == "fermi":
            zc = np.clip(z, -700.0, 700.0)
            e = np.exp(-np.abs(zc))
            return np.where(z >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
        if self.kind == "bose":
            # mu < 0 keeps z >= |mu|/T > 0
            zc = np.clip(z, 1e-300, 700.0)
            return 1.0 / np.expm1(zc)
        # zero-temperature fermi: indicator of r^2 <= mu
        return np.where(r * r <= self.mu, 1.0, 0.0)

    def f(self, r):
        return np.sqrt(self.f2(r))

    def support_radius(self, tol: float = 1e-18) -> float:
        """Radius beyond which f2 < tol (used to truncate quadrature)."""
        if self.kind == "zero":
            return 1.0
        if self.kind == "zero_temp_fermi":
            return math.sqrt(self.mu)
        if self.kind == "custom":
            if self.support_hint is not None:
                return self.support_hint
            r = 1.0
            while self.f2(r) > tol and r < 1e4:
                r *= 1.5
            return r
        return math.sqrt(max(self.mu, 0.0) + self.T * math.log(1.0 / tol))

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"


def bose(T: float, mu: float) -> DistributionFunction:
    return DistributionFunction("bose", T=T, mu=mu)


def fermi(T: float, mu: float) -> DistributionFunction:
    return DistributionFunction("fermi", T=T, mu=mu)


def zero_temp_fermi(mu: float) -> DistributionFunction:
    return DistributionFunction("zero_temp_fermi", mu=mu)


def custom_radial(profile, support_hint=None) -> DistributionFunction:
    return DistributionFunction("custom", profile=profile, support_hint=support_hint)


def zero_distribution() -> DistributionFunction:
    return DistributionFunction("zero")


def gaussian_f2(amplitude: float = 1.0, scale: float = 1.0) -> DistributionFunction:
    """|f|^2 = amplitude * exp(-(r/scale)^2)."""
    return DistributionFunction(
        "custom",
        profile=lambda r: amplitude * np.exp(-((np.asarray(r) / scale) ** 2)),
        support_hint=scale * 7.0,
    )


def eval_f2(f: DistributionFunction, r) -> float:
    if np.any(np.asarray(r) < 0):
        raise ValueError("radius must be nonnegative")
    return f.f2(r)


# ---------------------------------------------------------------------------
# interaction potentials


@dataclass(frozen=True)
class InteractionPotential:
    """Pair potential specified through its real even transform w-hat."""

    kind: str
    amplitude: float = 1.0
    width: float = 1.0
    evaluator: Optional[Callable] = None

    def what(self, k_abs):
        """w-hat at radius |k| (all built-in kinds are radial)."""
        k = np.asarray(k_abs, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(k)
        if self.kind == "delta":
            return np.full_like(k, self.amplitude)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-0.5 * (self.width * k) ** 2)
        if self.kind == "custom":
            out = np.asarray(self.evaluator(k), dtype=float)
            if not np.all(np.isfinite(out)):
                raise ValueError("custom w-hat takes non-finite values")
            return out
        raise ValueError(f"unknown potential kind {self.kind!r}")

    @property
    def what0(self) -> float:
        return float(self.what(0.0))


def delta_potential(amplitude: float = 1.0) -> InteractionPotential:
    return InteractionPotential("delta", amplitude=amplitude)


def gaussian_potential(amplitude: float, width: float) -> InteractionPotential:
    return InteractionPotential("gaussian", amplitude=amplitude, width=width)


def zero_potential() -> InteractionPotential:
    return InteractionPotential("zero")


def custom_potential(evaluator) -> InteractionPotential:
    return InteractionPotential("custom", evaluator=evaluator)


# ---------------------------------------------------------------------------
# covariance profile h


def eval_h(f: DistributionFunction, d: int, x: float, tol: float = 1e-10):
    """Radial transform of |f|^2 at radius |x|; returns (value, error estimate).

    The oscillatory angular kernel is handled analytically per dimension;
    QUADPACK's weighted rules take the cosine/sine factors, the Bessel
    kernels go through adaptive panels with a subdivision budget that grows
    with the number of oscillations.
    """
    if not 1 <= d <= 4:
        raise ValueError(f"dimension {d} outside 1..4")
    x = abs(float(x))
    if f.is_zero:
        return 0.0, 0.0
    rend = f.support_radius()
    f2 = f.f2
    if x == 0.0:
        val, err = integrate.quad(lambda r: f2(r) * r ** (d - 1), 0.0, rend, limit=200)
        s = sphere_area(d)
        return s * val, s * err

    if d == 1:
        val, err = integrate.quad(f2, 0.0, rend, weight="cos", wvar=x, limit=200)
        return 2.0 * val, 2.0 * err
    if d == 2:
        lim = max(200, int(60 * (1 + x * rend / math.pi)))
        val, err = integrate.quad(lambda r: f2(r) * r * j0(r * x), 0.0, rend, limit=lim)
        return 2 * math.pi * val, 2 * math.pi * err
    if d == 3:
        val, err = integrate.quad(lambda r: f2(r) * r, 0.0, rend, weight="sin", wvar=x, limit=200)
        return 4 * math.pi / x * val, 4 * math.pi / x * err
    lim = max(200, int(60 * (1 + x * rend / math.pi)))
    val, err = integrate.quad(lambda r: f2(r) * r * r * j1(r * x), 0.0, rend, limit=lim)
    c = (2 * math.pi) ** 2 / x
    return c * val, c * err


class CovarianceProfile:
    """Cached radial evaluator for h with a spline table for bulk lookups.

    The table extends until |h| has fallen below table_tol * |h(0)| (capped),
    beyond which the profile is treated as zero and the dropped tail enters
    the stored error estimate.
    """

    def __init__(self, f: DistributionFunction, d: int, table_tol: float = 1e-13,
                 x_max_cap: float = 400.0):
        self.f = f
        self.d = d
        self.table_tol = table_tol
        self.x_max_cap = x_max_cap
        self._spline = None
        self._table_err = 0.0
        self._decay_constant = None
        self.table_truncated = False
        self.h0, self.h0_err = eval_h(f, d, 0.0)

    # direct quadrature, no table
    def eval(self, x: float):
        return eval_h(self.f, self.d, x)

    def _build_table(self):
        if self.f.is_zero or self.h0 == 0.0:
            self._spline = lambda x: np.zeros_like(np.asarray(x, dtype=float))
            self.x_max = 1.0
            return
        rsup = self.f.support_radius(1e-10)
        dx = min(0.05, math.pi / (16.0 * max(rsup, 1e-6)))
        floor = self.table_tol * abs(self.h0)
        xs = [0.0]
        hs = [self.h0]
        errs = [self.h0_err]
        x = 0.0
        quiet = 0
        while x < self.x_max_cap and quiet < int(4.0 / dx) + 4:
            x += dx
            v, e = eval_h(self.f, self.d, x)
            xs.append(x)
            hs.append(v)
            errs.append(e)
            quiet = quiet + 1 if abs(v) < floor else 0
        self.x_max = x
        self.table_truncated = x >= self.x_max_cap
        self._table_err = max(errs)
        self._spline = CubicSpline(np.array(xs), np.array(hs), bc_type="natural")

    @property
    def spline(self):
        if self._spline is None:
            self._build_table()
        return self._spline

    def table_error(self) -> float:
        _ = self.spline
        return self._table_err

    def __call__(self, x):
        """Vectorized h(|x|) from the cached table (zero beyond its reach)."""
        sp = self.spline
        x = np.abs(np.asarray(x, dtype=float))
        out = np.asarray(sp(np.minimum(x, self.x_max)), dtype=float)
        return np.where(x <= self.x_max, out, 0.0)

    def derivative(self, n: int = 1):
        sp = self.spline
        if callable(sp) and not isinstance(sp, CubicSpline):
            return lambda x: np.zeros_like(np.asarray(x, dtype=float))
        dsp = sp.derivative(n)
        xm = self.x_max

        def dh(x):
            x = np.abs(np.asarray(x, dtype=float))
            return np.where(x <= xm, dsp(np.minimum(x, xm)), 0.0)

        return dh

    def decay_constant(self) -> float:
        """sup over the table of <x>^2 |h(x)| (tail-bound constant)."""
        if self._decay_constant is None:
            sp = self.spline
            if callable(sp) and not isinstance(sp, CubicSpline):
                self._decay_constant = 0.0
            else:
                xs = np.linspace(0.0, self.x_max, 2048)
                self._decay_constant = float(np.max((1.0 + xs ** 2) * np.abs(self(xs))))
        return self._decay_constant


def equilibrium_mass(f: DistributionFunction, w: InteractionPotential, d: int) -> float:
    """w-hat(0) times the total squared-distribution mass h(0)."""
    h0, _ = eval_h(f, d, 0.0)
    return w.what0 * h0


# ---------------------------------------------------------------------------
# hypothesis checker


@dataclass
class Bullet:
    name: str
    passed: Optional[bool]   # None marks indeterminate
    value: float
    threshold: Optional[float] = None
    note: str = ""


@dataclass
class HypothesisReport:
    d: int
    bullets: list

    @property
    def all_passed(self) -> bool:
        return all(b.passed for b in self.bullets if b.passed is not None) and \
            not any(b.passed is False for b in self.bullets)

    def bullet(self, name: str) -> Bullet:
        for b in self.bullets:
            if b.name == name:
                return b
        raise KeyError(name)


def _quad_or_none(fn, a, b, **kw):
    try:
        val, err = integrate.quad(fn, a, b, **kw)
        if not math.isfinite(val):
            return None, None
        return val, err
    except Exception:
        return None, None


def hypothesis_check(f: DistributionFunction, w: InteractionPotential, d: int,
                     epsilon_g: Optional[float] = None) -> HypothesisReport:
    """Numerically evaluate the admissibility bullets for (f, w) in dimension d.

    Integral bullets are quadratures over the radial variable; derivative
    bounds on the covariance profile use radial spline derivatives as the
    computed surrogate.  Quadrature failure marks a bullet indeterminate.
    """
    bullets = []
    s_ceil = math.ceil(d / 2 - 1)
    rend = f.support_radius()
    area = sphere_area(d)

    if f.is_zero:
        for name in ("weighted_l2", "f_gradf_integrable", "monotone_decreasing",
                     "h_derivative_decay", "h_low_frequency_integrable"):
            bullets.append(Bullet(name, True, 0.0, note="zero distribution"))
        prof = None
    else:
        # <r>^ceil(s) f in L^2
        val, err = _quad_or_none(lambda r: (1 + r * r) ** s_ceil * f.f2(r) * r ** (d - 1), 0, rend, limit=200)
        bullets.append(Bullet("weighted_l2", None if val is None else True,
                              math.nan if val is None else area * val))

        # integral of |xi|^{1-d} |f grad f|  ->  area * int |f f'| dr
        eps = 1e-6 * max(rend, 1.0)

        def ffp(r):
            fp = (f.f(r + eps) - f.f(max(r - eps, 0.0))) / (2 * eps)
            return abs(f.f(r) * fp)

        val, err = _quad_or_none(ffp, 0, rend * 1.2, limit=300)
        bullets.append(Bullet("f_gradf_integrable", None if val is None else True,
                              math.nan if val is None else area * val,
                              note="radial finite-difference gradient"))

        # strict radial decrease of f2
        rs = np.geomspace(1e-3 * max(rend, 1e-3), rend, 400)
        f2s = f.f2(rs)
        diffs = np.diff(f2s)
        live = f2s[:-1] > 1e-250
        strict = bool(np.all(diffs[live] < 0)) if np.any(live) else False
        worst = float(np.max(diffs[live])) if np.any(live) else 0.0
        bullets.append(Bullet("monotone_decreasing", strict, worst,
                              note="max consecutive increment on a log grid"))

        # <x>^2 d^alpha h bounded for |alpha| <= 2*ceil(s): radial surrogate
        prof = CovarianceProfile(f, d)
        try:
            xs = np.linspace(0.0, prof.spline.x[-1] if hasattr(prof.spline, "x") else 1.0, 1500)
            worst_sup = 0.0
            for n in range(0, 2 * s_ceil + 1):
                dn = prof(xs) if n == 0 else prof.derivative(n)(xs)
                worst_sup = max(worst_sup, float(np.max((1 + xs ** 2) * np.abs(dn))))
            bullets.append(Bullet("h_derivative_decay", bool(math.isfinite(worst_sup)), worst_sup,
                                  note=f"sup <x>^2 |h^(n)|, n <= {2 * s_ceil}, radial spline surrogate"))
        except Exception:
            bullets.append(Bullet("h_derivative_decay", None, math.nan, note="table build failed"))

        # |xi|^{1-d} (h + grad h) in L^1  ->  area * int (|h| + |h'|) dr
        try:
            xs = np.linspace(0.0, prof.x_max, 4000)
            hv = np.abs(prof(xs))
            hd = np.abs(prof.derivative(1)(xs))
            val = area * float(np.trapezoid(hv + hd, xs))
            bullets.append(Bullet("h_low_frequency_integrable", bool(math.isfinite(val)), val))
        except Exception:
            bullets.append(Bullet("h_low_frequency_integrable", None, math.nan))

    # potential conditions
    ks = np.linspace(0.0, 64.0, 4097)
    wneg = float(np.max(np.maximum(-w.what(ks), 0.0)))
    w0p = max(w.what0, 0.0)
    two_area = 2.0 * area

    if f.is_zero:
        bullets.append(Bullet("potential_focusing_part", True, 0.0, threshold=math.inf,
                              note="zero distribution: no constraint"))
    else:
        # ||(w-hat)_-||_inf * int |h| / |x|^{d-2} dx < 2 |S^{d-1}|
        try:
            xs = np.linspace(0.0, prof.x_max, 4000)
            ih = area * float(np.trapezoid(np.abs(prof(xs)) * xs, xs))
            thr = math.inf if ih == 0 else two_area / ih
            bullets.append(Bullet("potential_focusing_part", bool(wneg < thr), wneg, threshold=thr))
        except Exception:
            bullets.append(Bullet("potential_focusing_part", None, wneg))

    if epsilon_g is None:
        bullets.append(Bullet("potential_defocusing_part", None, w0p,
                              note="needs the low-frequency threshold from a multiplier scan"))
    else:
        thr = math.inf if epsilon_g <= 0 else two_area / epsilon_g
        bullets.append(Bullet("potential_defocusing_part", bool(epsilon_g * w0p < two_area),
                              w0p, threshold=thr))

    return HypothesisReport(d=d, bullets=bullets)
