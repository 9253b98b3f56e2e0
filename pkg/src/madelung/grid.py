"""Uniform periodic grid, spectral differentiation, and quadrature.

Everything downstream (states, propagation, fluid diagnostics) lives on one
of these grids.  Derivatives are computed in wavenumber space, so fields are
treated as periodic over [x_min, x_max); scenarios are responsible for
keeping their support away from the seam.  The rectangle rule is the matching
quadrature: it is spectrally accurate for periodic integrands and makes
integrals of spectral derivatives vanish identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "RealField",
    "ComplexField",
    "make_grid",
    "spectral_derivative",
    "integrate",
    "nearest_fill",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [x_min, x_max) with conjugate wavenumbers.

    ``x`` holds the n sample points (x_max itself is excluded, it aliases
    x_min).  ``wavenumbers`` follow the FFT ordering: entry 0 is the zero
    mode, entries are symmetric up to the single Nyquist mode.
    """

    n: int
    x_min: float
    x_max: float
    dx: float
    x: np.ndarray
    wavenumbers: np.ndarray

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


@dataclass(frozen=True)
class RealField:
    """Real-valued samples on a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        _check_values(values, self.grid)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ComplexField:
    """Complex-valued samples on a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        _check_values(values, self.grid)
        object.__setattr__(self, "values", values)


def _check_values(values: np.ndarray, grid: Grid) -> None:
    if values.shape != (grid.n,):
        raise ValueError(
            f"field length {values.shape} does not match grid size ({grid.n},)"
        )
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite entries")


def make_grid(n: int, x_min: float, x_max: float) -> Grid:
    """Build a uniform periodic grid with n points (n a power of two, >= 8)."""
    if not isinstance(n, (int, np.integer)):
        raise ValueError(f"grid size must be an integer, got {n!r}")
    n = int(n)
    if n < 8 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a power of two >= 8, got {n}")
    x_min = float(x_min)
    x_max = float(x_max)
    if not (np.isfinite(x_min) and np.isfinite(x_max)) or x_max <= x_min:
        raise ValueError(f"degenerate domain [{x_min}, {x_max}]")
    dx = (x_max - x_min) / n
    x = x_min + dx * np.arange(n)
    wavenumbers = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    return Grid(n=n, x_min=x_min, x_max=x_max, dx=dx, x=x, wavenumbers=wavenumbers)


def derivative_values(values: np.ndarray, grid: Grid, order: int) -> np.ndarray:
    """Spectral derivative on raw samples; complex in, complex out.

    The Nyquist mode is zeroed for odd orders so real input maps to real
    output; smooth resolved fields carry no Nyquist content anyway.
    """
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    fhat = np.fft.fft(values)
    k = grid.wavenumbers
    if order == 1:
        fac = 1j * k.copy()
        fac[grid.n // 2] = 0.0
    else:
        fac = -(k * k)
    return np.fft.ifft(fac * fhat)


def spectral_derivative(field, order: int = 1):
    """Differentiate a RealField or ComplexField, returning the same kind."""
    out = derivative_values(field.values, field.grid, order)
    if isinstance(field, RealField):
        return RealField(out.real, field.grid)
    if isinstance(field, ComplexField):
        return ComplexField(out, field.grid)
    raise TypeError(f"expected RealField or ComplexField, got {type(field)!r}")


def integrate(field: RealField) -> float:
    """Rectangle-rule integral over the periodic domain."""
    if not isinstance(field, RealField):
        raise TypeError("integrate expects a RealField")
    return float(np.sum(field.values) * field.grid.dx)


def nearest_fill(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Copy of ``values`` with masked-out entries set to the nearest valid one.

    Used to extend quotient fields (velocity, phase) across regions where the
    density is below the floor and the quotient carries no information.
    """
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValueError("mask has no valid entries")
    out = np.array(values, copy=True)
    if idx.size == mask.size:
        return out
    pos = np.arange(mask.size)
    right = np.searchsorted(idx, pos)
    right_c = np.clip(right, 0, idx.size - 1)
    left_c = np.clip(right - 1, 0, idx.size - 1)
    take_left = np.abs(pos - idx[left_c]) <= np.abs(idx[right_c] - pos)
    nearest = np.where(take_left, idx[left_c], idx[right_c])
    out[~mask] = values[nearest[~mask]]
    return out
