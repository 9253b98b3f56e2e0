"""Unitary time evolution by symmetric (Strang) operator splitting.

Each step applies half a potential phase, the exact kinetic factor in
wavenumber space, and the second potential half:

    psi <- exp(-i U dt / 2 hbar) F^-1[ exp(-i hbar k^2 dt / 2 m) F[ ... ] ]

The kinetic factor is exact, so the only time-discretization error is the
second-order splitting commutator; norm is preserved to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ComplexField, RealField
from .states import WaveFunction

__all__ = ["PropagatorConfig", "step", "evolve"]


@dataclass(frozen=True)
class PropagatorConfig:
    dt: float
    n_steps: int
    snapshot_every: int = 1

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be >= 0")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")


def _check_kinetic_phase(wf: WaveFunction, dt: float) -> None:
    grid = wf.grid
    k_max = float(np.max(np.abs(grid.wavenumbers)))
    phase = wf.constants.hbar * k_max**2 * dt / (2.0 * wf.constants.mass)
    if phase >= np.pi:
        raise ValueError(
            f"kinetic phase per step {phase:.3f} exceeds pi; reduce dt or refine less"
        )


def _factors(wf: WaveFunction, U: RealField, dt: float):
    hbar, m = wf.constants.hbar, wf.constants.mass
    half_v = np.exp(-0.5j * U.values * dt / hbar)
    kinetic = np.exp(-0.5j * hbar * wf.grid.wavenumbers**2 * dt / m)
    return half_v, kinetic


def _apply(values: np.ndarray, half_v: np.ndarray, kinetic: np.ndarray) -> np.ndarray:
    out = half_v * values
    out = np.fft.ifft(kinetic * np.fft.fft(out))
    return half_v * out


def step(wf: WaveFunction, U: RealField, dt: float) -> WaveFunction:
    """Advance one Strang step of size dt (dt = 0 returns the state unchanged)."""
    if U.grid is not wf.grid and not np.array_equal(U.grid.x, wf.grid.x):
        raise ValueError("potential and wavefunction live on different grids")
    if dt < 0.0:
        raise ValueError("dt must be >= 0")
    if dt == 0.0:
        return wf
    _check_kinetic_phase(wf, dt)
    half_v, kinetic = _factors(wf, U, dt)
    out = _apply(wf.psi.values, half_v, kinetic)
    return WaveFunction(ComplexField(out, wf.grid), wf.constants, wf.normalizable)


def evolve(
    wf: WaveFunction,
    U: RealField,
    config: PropagatorConfig,
    observers=(),
) -> WaveFunction:
    """Run config.n_steps steps, notifying observers with (t, state).

    Observers fire at t = 0 and after every config.snapshot_every steps.
    Observer exceptions propagate and abort the run.
    """
    if config.n_steps > 0:
        _check_kinetic_phase(wf, config.dt)
    for obs in observers:
        obs(0.0, wf)
    if config.n_steps == 0:
        return wf
    half_v, kinetic = _factors(wf, U, config.dt)
    values = wf.psi.values
    current = wf
    for i in range(1, config.n_steps + 1):
        values = _apply(values, half_v, kinetic)
        if i % config.snapshot_every == 0:
            current = WaveFunction(
                ComplexField(values, wf.grid), wf.constants, wf.normalizable
            )
            t = i * config.dt
            for obs in observers:
                obs(t, current)
    if config.n_steps % config.snapshot_every != 0:
        current = WaveFunction(
            ComplexField(values, wf.grid), wf.constants, wf.normalizable
        )
    return current
