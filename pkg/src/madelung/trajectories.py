"""Fluid-parcel (Bohmian) trajectories driven by the flow velocity.

Parcels are seeded at density quantiles, advected with classical RK4 using
cubic interpolation of the gridded velocity, and carry along-trajectory
records: log-density, velocity divergence, sampled phase action, and the
accumulated Lagrangian integral.  Mass conservation along a parcel then
shows up in two testable ways: d(ln rho)/dt + div u = 0 along the path, and
preservation of the cumulative-probability level each parcel started on.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, RealField
from .states import PhysicalConstants

__all__ = [
    "FlowSample",
    "FlowHistory",
    "ParcelEnsemble",
    "DensityCdf",
    "ProviderGapError",
    "BranchMismatchError",
    "seed_parcels",
    "advect",
    "continuity_residual",
    "action_check",
    "write_trajectory_csv",
]


class ProviderGapError(RuntimeError):
    """A required flow snapshot is missing from the provider."""


class BranchMismatchError(RuntimeError):
    """Phase records jump by more than half a branch between samples."""


@dataclass(frozen=True)
class FlowSample:
    """Per-time fields a parcel needs: velocity for stepping, the rest for records."""

    t: float
    u: RealField
    div_u: RealField | None = None
    ln_rho: RealField | None = None
    S_tilde: RealField | None = None
    lagrangian: RealField | None = None
    rho: RealField | None = None


class FlowHistory:
    """Time-keyed store of FlowSamples; the velocity provider for advection.

    Lookups must match a stored time within 1e-9; anything else is a gap and
    raises, because silently interpolating across a missing snapshot would
    corrupt the convergence order of everything downstream.
    """

    def __init__(self, grid: Grid, constants: PhysicalConstants):
        self.grid = grid
        self.constants = constants
        self._times: list[float] = []
        self._samples: list[FlowSample] = []

    def add(self, sample: FlowSample) -> None:
        if self._times and sample.t <= self._times[-1]:
            raise ValueError("flow samples must be added in increasing time order")
        self._times.append(sample.t)
        self._samples.append(sample)

    def _index(self, t: float) -> int:
        times = self._times
        i = int(np.searchsorted(times, t))
        for j in (i - 1, i):
            if 0 <= j < len(times) and abs(times[j] - t) <= 1e-9 * max(1.0, abs(t)) + 1e-12:
                return j
        raise ProviderGapError(f"no flow snapshot at t = {t!r}")

    def sample_at(self, t: float) -> FlowSample:
        return self._samples[self._index(t)]

    def velocity_at(self, t: float) -> RealField:
        return self._samples[self._index(t)].u


@dataclass
class ParcelEnsemble:
    """Parcel positions plus along-trajectory records (rows = record times)."""

    grid: Grid
    positions: np.ndarray
    quantiles: np.ndarray
    branch_period: float = np.inf
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    x_records: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    u_records: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    ln_rho_records: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    div_u_records: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    S_records: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    action_records: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    @property
    def n_parcels(self) -> int:
        return self.positions.size


class DensityCdf:
    """Spectrally exact cumulative integral of a density, invertible.

    Node values come from the Fourier antiderivative; between nodes a cubic
    Hermite interpolant (slopes are the density itself) keeps quantile
    inversion accurate to O(dx^4).
    """

    def __init__(self, rho: RealField):
        grid = rho.grid
        vals = rho.values
        rhohat = np.fft.fft(vals)
        mean = rhohat[0].real / grid.n
        k = grid.wavenumbers.copy()
        k[0] = 1.0
        coef = rhohat / (1j * k)
        coef[0] = 0.0
        coef[grid.n // 2] = 0.0
        g = np.fft.ifft(coef).real
        self.grid = grid
        self.rho = vals
        self.F = mean * (grid.x - grid.x[0]) + (g - g[0])
        self.total = mean * grid.length

    def _cell(self, j: int):
        jp = (j + 1) % self.grid.n
        f0 = self.F[j]
        f1 = self.F[jp] if jp != 0 else self.total  # F(x_max) closes the domain
        return f0, f1, self.rho[j], self.rho[jp]

    def _hermite(self, j: int, s: np.ndarray | float):
        f0, f1, d0, d1 = self._cell(j)
        h = self.grid.dx
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1

    def value(self, x: float) -> float:
        """Cumulative mass from x_min to x."""
        grid = self.grid
        xw = grid.x_min + (x - grid.x_min) % grid.length
        j = min(int((xw - grid.x_min) / grid.dx), grid.n - 1)
        s = (xw - grid.x[j]) / grid.dx
        return float(self._hermite(j, s))

    def quantile(self, p: float) -> float:
        """Position x with cumulative mass p * total to its left."""
        if not 0.0 < p < 1.0:
            raise ValueError("quantile level must lie strictly inside (0, 1)")
        target = p * self.total
        grid = self.grid
        j = int(np.searchsorted(self.F, target)) - 1
        j = min(max(j, 0), grid.n - 2)
        denom = max(self.rho[j], self.total / grid.length * 1e-12)
        s = (target - self.F[j]) / (denom * grid.dx)
        s = min(max(s, 0.0), 1.0)
        for _ in range(6):  # Newton on the Hermite cell polynomial
            f = self._hermite(j, s) - target
            d = max(self._hermite_deriv(j, s), 1e-300)
            s -= f / (d * grid.dx)
            s = min(max(s, 0.0), 1.0)
        return float(grid.x[j] + s * grid.dx)

    def _hermite_deriv(self, j: int, s: float) -> float:
        f0, f1, d0, d1 = self._cell(j)
        h = self.grid.dx
        dh00 = 6 * s**2 - 6 * s
        dh10 = 3 * s**2 - 4 * s + 1
        dh01 = -6 * s**2 + 6 * s
        dh11 = 3 * s**2 - 2 * s
        return (dh00 * f0 + dh10 * h * d0 + dh01 * f1 + dh11 * h * d1) / h


def seed_parcels(rho: RealField, n_parcels: int) -> ParcelEnsemble:
    """Place parcels at the density quantiles (i + 1/2)/n; deterministic."""
    if n_parcels < 1:
        raise ValueError("need at least one parcel")
    cdf = DensityCdf(rho)
    levels = (np.arange(n_parcels) + 0.5) / n_parcels
    positions = np.array([cdf.quantile(p) for p in levels])
    return ParcelEnsemble(grid=rho.grid, positions=positions, quantiles=levels)


def _interp_cubic(values: np.ndarray, grid: Grid, xq: np.ndarray) -> np.ndarray:
    """Periodic 4-point Lagrange cubic interpolation at arbitrary positions."""
    pos = (xq - grid.x_min) / grid.dx
    j = np.floor(pos).astype(int)
    s = pos - j
    jm1, j0, j1, j2 = (np.mod(j + o, grid.n) for o in (-1, 0, 1, 2))
    wm1 = -s * (s - 1.0) * (s - 2.0) / 6.0
    w0 = (s * s - 1.0) * (s - 2.0) / 2.0
    w1 = -s * (s + 1.0) * (s - 2.0) / 2.0
    w2 = s * (s * s - 1.0) / 6.0
    return wm1 * values[jm1] + w0 * values[j0] + w1 * values[j1] + w2 * values[j2]


def _wrap(x: np.ndarray, grid: Grid) -> np.ndarray:
    return grid.x_min + np.mod(x - grid.x_min, grid.length)


def advect(
    ensemble: ParcelEnsemble,
    flow: FlowHistory,
    dt: float,
    n_steps: int,
    t0: float = 0.0,
) -> ParcelEnsemble:
    """RK4-advect parcels through the flow, recording fields along the way.

    The provider must hold samples at t0 + k dt/2 for every k; missing times
    raise ProviderGapError.  Sampled phase records are matched to the nearest
    2 pi hbar / m branch of the previous record, and the action integral is
    accumulated by the trapezoid rule.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    grid = ensemble.grid
    period = 2.0 * np.pi * flow.constants.hbar / flow.constants.mass
    x = ensemble.positions.copy()

    def record_at(t, x_now, prev_S):
        smp = flow.sample_at(t)
        if smp.div_u is None or smp.ln_rho is None or smp.S_tilde is None \
                or smp.lagrangian is None:
            raise ProviderGapError(f"flow sample at t = {t!r} lacks record fields")
        u_p = _interp_cubic(smp.u.values, grid, x_now)
        div_p = _interp_cubic(smp.div_u.values, grid, x_now)
        ln_p = _interp_cubic(smp.ln_rho.values, grid, x_now)
        lag_p = _interp_cubic(smp.lagrangian.values, grid, x_now)
        S_p = _interp_cubic(smp.S_tilde.values, grid, x_now)
        if prev_S is not None:
            S_p = S_p + period * np.round((prev_S - S_p) / period)
        return u_p, div_p, ln_p, lag_p, S_p

    u0, div0, ln0, lag0, S0 = record_at(t0, x, None)
    times = [t0]
    xs, us, divs, lns, Ss, acts = [x.copy()], [u0], [div0], [ln0], [S0], [np.zeros_like(x)]
    lag_prev = lag0

    for k in range(n_steps):
        t = t0 + k * dt
        u_a = flow.velocity_at(t).values
        u_m = flow.velocity_at(t + 0.5 * dt).values
        u_b = flow.velocity_at(t + dt).values
        k1 = _interp_cubic(u_a, grid, x)
        k2 = _interp_cubic(u_m, grid, _wrap(x + 0.5 * dt * k1, grid))
        k3 = _interp_cubic(u_m, grid, _wrap(x + 0.5 * dt * k2, grid))
        k4 = _interp_cubic(u_b, grid, _wrap(x + dt * k3, grid))
        x = _wrap(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), grid)

        t_next = t0 + (k + 1) * dt
        u_p, div_p, ln_p, lag_p, S_p = record_at(t_next, x, Ss[-1])
        times.append(t_next)
        xs.append(x.copy())
        us.append(u_p)
        divs.append(div_p)
        lns.append(ln_p)
        Ss.append(S_p)
        acts.append(acts[-1] + 0.5 * dt * (lag_prev + lag_p))
        lag_prev = lag_p

    return ParcelEnsemble(
        grid=grid,
        positions=x,
        quantiles=ensemble.quantiles.copy(),
        branch_period=period,
        times=np.asarray(times),
        x_records=np.vstack(xs),
        u_records=np.vstack(us),
        ln_rho_records=np.vstack(lns),
        div_u_records=np.vstack(divs),
        S_records=np.vstack(Ss),
        action_records=np.vstack(acts),
    )


def continuity_residual(ensemble: ParcelEnsemble) -> np.ndarray:
    """Per-parcel max of |d(ln rho)/dt + div u| along the trajectory.

    Central differences at interior record times; needs >= 3 records.
    """
    times = ensemble.times
    if times.size < 3:
        raise ValueError("continuity residual needs at least 3 recorded snapshots")
    dt = times[1] - times[0]
    ln = ensemble.ln_rho_records
    dv = ensemble.div_u_records
    dln_dt = (ln[2:, :] - ln[:-2, :]) / (2.0 * dt)
    resid = np.abs(dln_dt + dv[1:-1, :])
    return resid.max(axis=0)


def action_check(ensemble: ParcelEnsemble) -> np.ndarray:
    """Per-parcel |Delta S~ - integral of the Lagrangian| over the run.

    A consecutive sampled-phase change beyond half a branch means the
    nearest-branch matching was ambiguous, so that is an error, not a number.
    """
    if ensemble.times.size < 1:
        raise ValueError("no records")
    S = ensemble.S_records
    if S.shape[0] > 1:
        worst = float(np.max(np.abs(np.diff(S, axis=0))))
        if worst > 0.5 * ensemble.branch_period:
            raise BranchMismatchError(
                f"sampled phase jumped by {worst:.3g} between records, "
                f"more than half the branch period {ensemble.branch_period:.3g}"
            )
    return np.abs((S[-1, :] - S[0, :]) - ensemble.action_records[-1, :])


def write_trajectory_csv(ensemble: ParcelEnsemble, path) -> None:
    """Dump records as (parcel_id, t, x, u, ln_rho, div_u, action, S_sampled)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parcel_id", "t", "x", "u", "ln_rho", "div_u", "action", "S_sampled"])
        for p in range(ensemble.n_parcels):
            for i, t in enumerate(ensemble.times):
                writer.writerow(
                    [p]
                    + [
                        format(v, ".17g")
                        for v in (
                            t,
                            ensemble.x_records[i, p],
                            ensemble.u_records[i, p],
                            ensemble.ln_rho_records[i, p],
                            ensemble.div_u_records[i, p],
                            ensemble.action_records[i, p],
                            ensemble.S_records[i, p],
                        )
                    ]
                )
