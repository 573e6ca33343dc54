"""Finite Gaussian-mode ensembles and their coupled mean-field dynamics.

The random field is represented by modes (xi_j, a_j, u_j) attached to
orthonormal Gaussian factors, so every expectation is an exact finite sum
over modes: the density is sum_j |u_j|^2 with no sampling error.

Time stepping is Strang splitting for

    i d/dt u_j = -Lap u_j + (w * rho) u_j,      rho = sum_k |u_k|^2,

written in the gauged form with the constant m inside the kinetic factor:
half-step e^{-i dt/2 (m + |xi|^2)} in frequency, full-step physical phase
e^{-i dt ((w*rho)(x) - m)}, half-step kinetic.  Equilibria then rotate by
the exact phases e^{-i t (m + |xi_j|^2)} and the splitting preserves every
per-mode mass to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .equilibrium import DistributionFunction, InteractionPotential
from .field import SpectralField
from .grid import TorusGrid
from .lpaley import LittlewoodPaley, eta_j


@dataclass(frozen=True)
class ModeEnsemble:
    """Grid, carriers (M, d), weights (M,), stacked fields (M, *grid), time, mass."""

    grid: TorusGrid
    carriers: np.ndarray
    weights: np.ndarray
    fields: np.ndarray
    t: float
    m: float
    w: InteractionPotential

    @property
    def n_modes(self) -> int:
        return len(self.weights)

    @property
    def space_axes(self) -> tuple:
        return tuple(range(1, self.grid.d + 1))

    def mode_field(self, j: int) -> SpectralField:
        return SpectralField.from_values(self.grid, self.fields[j])

    def mode_masses(self) -> np.ndarray:
        """Per-mode squared L2 norm ||u_j||^2."""
        if self.n_modes == 0:
            return np.zeros(0)
        return np.sum(np.abs(self.fields) ** 2, axis=self.space_axes) * self.grid.dx

    def density_values(self) -> np.ndarray:
        if self.n_modes == 0:
            return np.zeros(self.grid.shape)
        return np.sum(np.abs(self.fields) ** 2, axis=0)

    def density(self) -> SpectralField:
        return SpectralField.from_values(self.grid, self.density_values().astype(complex))

    def potential_values(self) -> np.ndarray:
        """(w * rho)(x) through the frequency-side multiplier."""
        rho = self.density_values()
        sym = self.w.what(self.grid.xi_norm)
        return np.fft.ifftn(sym * np.fft.fftn(rho)).real

    def equilibrium_fields(self, t: Optional[float] = None) -> np.ndarray:
        """Analytic equilibrium modes a_j e^{i xi_j.x - i t (m + |xi_j|^2)}."""
        t = self.t if t is None else t
        out = np.empty((self.n_modes,) + self.grid.shape, dtype=complex)
        for j in range(self.n_modes):
            phase = np.zeros(self.grid.shape)
            for comp, x in zip(self.carriers[j], self.grid.x_vectors):
                phase = phase + comp * x
            freq2 = float(np.dot(self.carriers[j], self.carriers[j]))
            out[j] = self.weights[j] * np.exp(1j * (phase - t * (self.m + freq2)))
        return out


@dataclass
class InitReport:
    retained_mass: float
    truncated_mass: float

    @property
    def truncated_fraction(self) -> float:
        tot = self.retained_mass + self.truncated_mass
        return self.truncated_mass / tot if tot > 0 else 0.0


def init_equilibrium(grid: TorusGrid, f: DistributionFunction, w: InteractionPotential,
                     threshold: float = 1e-8, m_override: Optional[float] = None):
    """Equilibrium ensemble from all lattice modes with f2 * dxi >= threshold.

    The gauge mass is w-hat(0) times the *retained lattice* mass, the unique
    value that makes the discrete equilibrium an exact solution; the
    continuum quadrature value is available from equilibrium_mass().
    Returns (ensemble, InitReport with the discarded weight).
    """
    r = grid.xi_norm
    cell_mass = f.f2(r) * grid.dxi
    keep = cell_mass >= threshold
    total = float(np.sum(cell_mass))
    retained = float(np.sum(cell_mass[keep]))
    if not np.any(keep):
        if total > 0.0:
            raise ValueError("mode threshold removed every lattice mode of a nonzero distribution")
        ens = ModeEnsemble(grid=grid, carriers=np.zeros((0, grid.d)), weights=np.zeros(0),
                           fields=np.zeros((0,) + grid.shape, dtype=complex), t=0.0,
                           m=0.0 if m_override is None else m_override, w=w)
        return ens, InitReport(0.0, 0.0)

    idx = np.argwhere(keep)
    carriers = np.empty((len(idx), grid.d))
    for a in range(grid.d):
        carriers[:, a] = grid.xi_axis[idx[:, a]]
    weights = np.sqrt(cell_mass[keep])
    order = np.lexsort(carriers.T[::-1])  # fixed mode order: lexicographic carriers
    carriers, weights = carriers[order], weights[order]

    fields = np.empty((len(weights),) + grid.shape, dtype=complex)
    for j in range(len(weights)):
        phase = np.zeros(grid.shape)
        for comp, x in zip(carriers[j], grid.x_vectors):
            phase = phase + comp * x
        fields[j] = weights[j] * np.exp(1j * phase)

    m = w.what0 * retained if m_override is None else m_override
    ens = ModeEnsemble(grid=grid, carriers=carriers, weights=weights, fields=fields,
                       t=0.0, m=m, w=w)
    return ens, InitReport(retained_mass=retained, truncated_mass=total - retained)


def density(ens: ModeEnsemble) -> SpectralField:
    return ens.density()


def step(ens: ModeEnsemble, dt: float) -> ModeEnsemble:
    """One Strang step; pure (returns the advanced ensemble)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if ens.n_modes == 0:
        return replace(ens, t=ens.t + dt)
    g = ens.grid
    axes = ens.space_axes
    kin = np.exp(-0.5j * dt * (ens.m + g.xi_squared))

    hat = np.fft.fftn(ens.fields, axes=axes)
    hat *= kin
    u = np.fft.ifftn(hat, axes=axes)

    rho = np.sum(np.abs(u) ** 2, axis=0)
    sym = ens.w.what(g.xi_norm)
    pot = np.fft.ifftn(sym * np.fft.fftn(rho)).real
    u *= np.exp(-1j * dt * (pot - ens.m))

    hat = np.fft.fftn(u, axes=axes)
    hat *= kin
    u = np.fft.ifftn(hat, axes=axes)
    return replace(ens, fields=u, t=ens.t + dt)


def conserved_energy(ens: ModeEnsemble) -> float:
    """Kinetic + gauge + interaction energy (constant along the exact flow)."""
    if ens.n_modes == 0:
        return 0.0
    g = ens.grid
    hat = np.fft.fftn(ens.fields, axes=ens.space_axes) * g.dx
    wgt = (2 * math.pi) ** (-g.d) * g.dxi
    kinetic = float(np.sum(g.xi_squared[None] * np.abs(hat) ** 2) * wgt)
    gauge = ens.m * float(np.sum(ens.mode_masses()))
    rho = ens.density_values()
    sym = ens.w.what(g.xi_norm)
    wrho = np.fft.ifftn(sym * np.fft.fftn(rho)).real
    interaction = 0.5 * float(np.sum(wrho * rho) * g.dx)
    return kinetic + gauge + interaction


# ---------------------------------------------------------------------------
# perturbations


@dataclass(frozen=True)
class BumpSpec:
    """Gaussian envelope times a carrier wave, targeted at ensemble modes."""

    amplitude: float
    width: float
    center: tuple
    carrier: tuple
    mode: int = 0
    coefficients: Optional[np.ndarray] = None  # spread over modes when given

    def field_values(self, grid: TorusGrid) -> np.ndarray:
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        carrier = np.atleast_1d(np.asarray(self.carrier, dtype=float))
        dist2 = np.zeros(grid.shape)
        phase = np.zeros(grid.shape)
        for c, kc, x in zip(center, carrier, grid.x_vectors):
            dx = x - c
            dx = dx - grid.L * np.round(dx / grid.L)  # minimum image
            dist2 = dist2 + dx * dx
            phase = phase + kc * x
        env = np.exp(-dist2 / (2.0 * self.width ** 2))
        return self.amplitude * env * np.exp(1j * phase)


@dataclass(frozen=True)
class PerturbationState:
    """Bookkeeping of the equilibrium the perturbed ensemble deviates from."""

    carriers: np.ndarray
    weights: np.ndarray
    m: float

    def equilibrium_at(self, grid: TorusGrid, t: float) -> np.ndarray:
        out = np.empty((len(self.weights),) + grid.shape, dtype=complex)
        for j in range(len(self.weights)):
            phase = np.zeros(grid.shape)
            for comp, x in zip(self.carriers[j], grid.x_vectors):
                phase = phase + comp * x
            freq2 = float(np.dot(self.carriers[j], self.carriers[j]))
            out[j] = self.weights[j] * np.exp(1j * (phase - t * (self.m + freq2)))
        return out

    def deviations(self, ens: ModeEnsemble) -> np.ndarray:
        return ens.fields - self.equilibrium_at(ens.grid, ens.t)

    def induced_potential(self, ens: ModeEnsemble) -> np.ndarray:
        """V = sum_j (|u_j|^2 - |y_j|^2), exactly real."""
        return ens.density_values() - np.sum(self.weights ** 2)

    def reconstructed_potential(self, ens: ModeEnsemble) -> np.ndarray:
        """V rebuilt from E|Z|^2 + 2 Re E(Y-bar Z); equals induced_potential
        by the mode-orthogonality identity."""
        Z = self.deviations(ens)
        Y = self.equilibrium_at(ens.grid, ens.t)
        return (np.sum(np.abs(Z) ** 2, axis=0)
                + 2.0 * np.sum(np.conj(Y) * Z, axis=0).real)


def add_perturbation(ens: ModeEnsemble, spec: BumpSpec):
    """Perturb one mode (or spread over modes) and remember the equilibrium."""
    state = PerturbationState(carriers=ens.carriers.copy(), weights=ens.weights.copy(), m=ens.m)
    bump = spec.field_values(ens.grid)
    fields = ens.fields.copy()
    if spec.coefficients is not None:
        coeffs = np.asarray(spec.coefficients, dtype=complex)
        if len(coeffs) != ens.n_modes:
            raise ValueError("one spread coefficient per mode is required")
        for j in range(ens.n_modes):
            fields[j] = fields[j] + coeffs[j] * bump
    else:
        if not 0 <= spec.mode < ens.n_modes:
            raise ValueError(f"mode index {spec.mode} outside 0..{ens.n_modes - 1}")
        fields[spec.mode] = fields[spec.mode] + bump
    return replace(ens, fields=fields), state


# ---------------------------------------------------------------------------
# deviation norms (the solution-space ingredients)


def critical_exponents(d: int) -> dict:
    """s = d/2-1, p = 2(d+2)/d, q = 4d/(d+1), the cubic-critical family."""
    return {"s": d / 2 - 1, "p": 2 * (d + 2) / d, "q": 4 * d / (d + 1)}


def _pointwise_l2_modes(stack: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(stack) ** 2, axis=0))


def _lebesgue_of_values(vals: np.ndarray, p, dx: float) -> float:
    if p == math.inf:
        return float(np.max(vals))
    return float((np.sum(vals ** float(p)) * dx) ** (1.0 / float(p)))


def deviation_norms(grid: TorusGrid, stack: np.ndarray, lp: Optional[LittlewoodPaley] = None) -> dict:
    """Spatial ingredient norms of a deviation stack at one time."""
    d = grid.d
    ex = critical_exponents(d)
    s, p, q = ex["s"], ex["p"], ex["q"]
    out = {}
    if stack.shape[0] == 0:
        return {k: 0.0 for k in ("l2", "hs", "l_dplus2", "w_sp", "besov_q")}
    axes = tuple(range(1, d + 1))
    out["l2"] = float(np.sqrt(np.sum(np.abs(stack) ** 2) * grid.dx))
    hat = np.fft.fftn(stack, axes=axes) * grid.dx
    wgt = (2 * math.pi) ** (-d) * grid.dxi
    out["hs"] = float(np.sqrt(np.sum((1 + grid.xi_squared[None]) ** s * np.abs(hat) ** 2) * wgt))
    out["l_dplus2"] = _lebesgue_of_values(_pointwise_l2_modes(stack), d + 2, grid.dx)
    smooth = np.fft.ifftn((1 + grid.xi_squared[None]) ** (s / 2) * np.fft.fftn(stack, axes=axes), axes=axes)
    out["w_sp"] = _lebesgue_of_values(_pointwise_l2_modes(smooth), p, grid.dx)
    lp = lp or LittlewoodPaley(grid)
    acc = 0.0
    hat_raw = np.fft.fftn(stack, axes=axes)
    for j in lp.j_resolvable:
        block = np.fft.ifftn(eta_j(grid.xi_norm, j)[None] * hat_raw, axes=axes)
        nj = _lebesgue_of_values(_pointwise_l2_modes(block), q, grid.dx)
        w = 1.0 if j < 0 else 2.0 ** (j / 2.0)
        acc += w * nj * nj
    out["besov_q"] = math.sqrt(acc)
    return out


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    times: np.ndarray
    mode_masses: np.ndarray        # (n_obs, M)
    energies: np.ndarray           # (n_obs,)
    norms: Optional[dict]          # name -> (n_obs,) arrays, perturbation runs only
    snapshot_times: np.ndarray
    snapshots: Optional[np.ndarray]       # (n_snap, M, *grid) deviation stacks
    density_extrema: np.ndarray    # (n_obs, 2) min/max of the density
    final: ModeEnsemble
    reference: Optional[PerturbationState]


def evolve(ens: ModeEnsemble, T: float, dt: float, obs_stride: int = 1,
           reference: Optional[PerturbationState] = None,
           snapshot_stride: Optional[int] = None,
           record_norms: bool = False,
           observers: Optional[list] = None) -> Trajectory:
    """Step to time T recording observables every obs_stride steps.

    Aborts with a diagnostic on non-finite field values.  Extra observer
    callables receive (step_index, ensemble).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not an integer number of steps of dt={dt}")

    lp = LittlewoodPaley(ens.grid) if record_norms else None
    times, masses, energies, extrema = [], [], [], []
    norm_rows = [] if (record_norms and reference is not None) else None
    snap_times, snaps = [], [] if snapshot_stride else None

    def observe(i, state):
        if not np.all(np.isfinite(state.fields.view(float))):
            raise FloatingPointError(f"non-finite field values at step {i}, t={state.t}")
        times.append(state.t)
        masses.append(state.mode_masses())
        energies.append(conserved_energy(state))
        rho = state.density_values()
        extrema.append((float(rho.min()) if rho.size else 0.0,
                        float(rho.max()) if rho.size else 0.0))
        if norm_rows is not None:
            norm_rows.append(deviation_norms(state.grid, reference.deviations(state), lp))
        if snaps is not None and (i % (snapshot_stride * obs_stride) == 0 or i == n_steps):
            snap_times.append(state.t)
            if reference is not None:
                snaps.append(reference.deviations(state))
            else:
                snaps.append(state.fields.copy())
        for fn in observers or ():
            fn(i, state)

    state = ens
    observe(0, state)
    for i in range(1, n_steps + 1):
        state = step(state, dt)
        if i % obs_stride == 0 or i == n_steps:
            observe(i, state)

    norms = None
    if norm_rows:
        norms = {k: np.array([row[k] for row in norm_rows]) for k in norm_rows[0]}
    return Trajectory(times=np.array(times),
                      mode_masses=np.array(masses) if masses else np.zeros((0, 0)),
                      energies=np.array(energies),
                      norms=norms,
                      snapshot_times=np.array(snap_times),
                      snapshots=np.array(snaps) if snaps else None,
                      density_extrema=np.array(extrema),
                      final=state,
                      reference=reference)


# ---------------------------------------------------------------------------
# scattering probe


@dataclass
class ProbeReport:
    times: np.ndarray
    cauchy: np.ndarray         # consecutive unwound differences, length n-1
    local_mass: np.ndarray     # L2 mass of the deviation in a fixed ball
    cauchy_decreasing: bool
    mass_decreasing: bool
    recurrence_time: float
    window_warning: bool


def scattering_probe(traj: Trajectory, grid: TorusGrid, m: float,
                     ball_center=None, ball_radius: Optional[float] = None) -> ProbeReport:
    """Free-unwound Cauchy differences and local mass of the deviation.

    Decreasing Cauchy differences signal convergence of S(-t)Z(t); the
    potential-free control run keeps it exactly constant.  A window past
    the torus recurrence time gets a warning flag.
    """
    if traj.snapshots is None:
        raise ValueError("trajectory carries no snapshots; evolve with snapshot_stride")
    ts = traj.snapshot_times
    Z = traj.snapshots
    axes = tuple(range(1, 1 + grid.d))  # space axes within one (M, *grid) stack

    unwound = np.empty_like(Z)
    for i, t in enumerate(ts):
        phase = np.exp(1j * t * (m + grid.xi_squared))
        unwound[i] = np.fft.ifftn(phase[None] * np.fft.fftn(Z[i], axes=axes), axes=axes)

    diffs = unwound[1:] - unwound[:-1]
    cauchy = np.sqrt(np.sum(np.abs(diffs) ** 2, axis=tuple(range(1, 2 + grid.d))) * grid.dx)

    center = np.full(grid.d, grid.L / 2.0) if ball_center is None else np.asarray(ball_center, float)
    radius = grid.L / 8.0 if ball_radius is None else ball_radius
    dist2 = np.zeros(grid.shape)
    for c, x in zip(center, grid.x_vectors):
        dx = x - c
        dx = dx - grid.L * np.round(dx / grid.L)
        dist2 = dist2 + dx * dx
    ball = dist2 <= radius * radius
    dens = np.sum(np.abs(Z) ** 2, axis=1)
    local = np.sqrt(np.sum(dens[:, ball], axis=1) * grid.dx)

    return ProbeReport(
        times=ts,
        cauchy=cauchy,
        local_mass=local,
        cauchy_decreasing=bool(np.all(np.diff(cauchy) < 0)) if len(cauchy) > 1 else True,
        mass_decreasing=bool(np.all(np.diff(local) < 0)),
        recurrence_time=grid.recurrence_time,
        window_warning=bool(ts[-1] > grid.recurrence_time),
    )
