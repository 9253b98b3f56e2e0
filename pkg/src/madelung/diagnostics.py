"""Fluid and thermodynamic-analog diagnostics of a wavefunction snapshot.

Extracted fields, with rho = |psi|^2, S the unwrapped phase action,
S~ = S/m, and the per-unit-mass convention throughout:

    u       = J / rho,  J = (hbar/m) Im(psi* dpsi/dx)   (flow velocity)
    v_i     = -(hbar/2m) dln(rho)/dx                    (osmotic velocity)
    I~      = v_i^2 / 2                                 (internal energy density)
    Q~      = -(hbar^2/2m^2) (d2 sqrt(rho)/dx2)/sqrt(rho)   (Bohm potential)
    Pi      = -(hbar/2m)^2 rho d2 ln(rho)/dx2           (pseudo-pressure)
    K~      = u^2 / 2                                   (kinetic density)

Numerical policy: spectral derivatives are applied only to globally smooth
periodic fields (psi, rho, sqrt(rho), J); logarithmic derivatives are formed
as pointwise quotients with a floored density,

    dln(rho)/dx  := (drho/dx) / max(rho, floor)
    d2ln(rho)/dx2 := (d2rho/dx2)/max(rho, floor) - (dln(rho)/dx)^2

which keeps integration-by-parts identities exact at the quadrature level
and stays finite next to density nodes.  Three equivalent routes to the Bohm
potential are provided; "amplitude" is the default, "wavefunction" (curvature
of psi itself) is the right choice for states whose sqrt(rho) has kinks at
nodes, and "log" is the cross-check route used by the pointwise enthalpy
identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, RealField, derivative_values, nearest_fill
from .states import (
    DEFAULT_DENSITY_FLOOR,
    PhysicalConstants,
    PolarDecomposition,
    WaveFunction,
    polar_decompose,
)

__all__ = [
    "MadelungFields",
    "ExpectationReport",
    "madelung_fields",
    "velocity",
    "phase_gradient_velocity",
    "bohm_potential",
    "bohm_potential_log_form",
    "bohm_potential_curvature_form",
    "pseudo_pressure",
    "fisher_information",
    "expectations",
    "bernoulli_residual",
    "nonspreading_residual",
    "DiagnosticsError",
]

BOHM_FORMS = ("amplitude", "wavefunction", "log")


class DiagnosticsError(RuntimeError):
    """Internal consistency failure (e.g. the two energy forms disagree)."""


@dataclass(frozen=True)
class MadelungFields:
    """One-snapshot bundle of hydrodynamic fields."""

    rho: RealField
    S: RealField
    u: RealField
    div_u: RealField
    Q_tilde: RealField
    Pi: RealField
    internal_density: RealField
    v_i: RealField
    kinetic_density: RealField
    valid_mask: np.ndarray
    constants: PhysicalConstants


@dataclass(frozen=True)
class ExpectationReport:
    """Scalar diagnostics of one snapshot.

    E is the sum form <K~ + Q~ + U~>; E_hamiltonian is the quadratic form
    (1/m) * <psi| H |psi>.  The two are asserted to agree.
    """

    t: float
    norm: float
    K: float
    Q: float
    U: float
    I: float
    E: float
    E_hamiltonian: float
    FI: float
    accel: float
    vi_mean: float
    Pi_integral: float
    bernoulli_residual_max: float | None = None
    nonspread_residual: float | None = None


@dataclass(frozen=True)
class _Work:
    grid: Grid
    constants: PhysicalConstants
    psi: np.ndarray
    rho: np.ndarray
    rho_f: np.ndarray
    mask: np.ndarray
    drho: np.ndarray
    ddrho: np.ndarray
    J: np.ndarray
    u_raw: np.ndarray
    u: np.ndarray
    div_u: np.ndarray
    w: np.ndarray          # dln(rho)/dx, quotient form
    ell2: np.ndarray       # d2ln(rho)/dx2, quotient form
    v_i: np.ndarray
    internal: np.ndarray
    Pi: np.ndarray
    Q: np.ndarray
    polar: PolarDecomposition


def _compute(
    wf: WaveFunction,
    floor_rel: float,
    bohm_form: str,
    region_mask: np.ndarray | None,
) -> _Work:
    if bohm_form not in BOHM_FORMS:
        raise ValueError(f"bohm_form must be one of {BOHM_FORMS}, got {bohm_form!r}")
    grid = wf.grid
    hbar, m = wf.constants.hbar, wf.constants.mass
    psi = wf.psi.values
    rho = psi.real**2 + psi.imag**2
    rho_max = float(rho.max())
    if rho_max <= 0.0:
        raise ValueError("density is identically zero")
    floor = floor_rel * rho_max
    mask = rho >= floor
    if region_mask is not None:
        mask = mask & region_mask
    if not np.any(mask):
        raise ValueError("density floor (and region) leave no valid points")
    rho_f = np.maximum(rho, floor)

    dpsi = derivative_values(psi, grid, 1)
    drho = derivative_values(rho, grid, 1).real
    ddrho = derivative_values(rho, grid, 2).real

    J = (hbar / m) * (psi.conj() * dpsi).imag
    u_raw = J / rho_f
    u = nearest_fill(u_raw, mask)
    dJ = derivative_values(J, grid, 1).real
    w = drho / rho_f
    div_u = nearest_fill(dJ / rho_f - u_raw * w, mask)
    ell2 = ddrho / rho_f - w * w

    half = hbar / (2.0 * m)
    v_i = -half * w
    internal = 0.5 * v_i * v_i
    Pi = -(half * half) * (ddrho * (rho / rho_f) - rho * w * w)

    c_q = hbar * hbar / (2.0 * m * m)
    if bohm_form == "amplitude":
        a = np.sqrt(rho)
        dda = derivative_values(a, grid, 2).real
        Q = -c_q * dda / np.sqrt(rho_f)
    elif bohm_form == "wavefunction":
        ddpsi = derivative_values(psi, grid, 2)
        curv = (psi.conj() * ddpsi).real / rho_f
        Q = -c_q * curv - 0.5 * u_raw * u_raw
    else:
        Q = -(half * half) * (ell2 + 0.5 * w * w)

    polar = polar_decompose(wf, floor_rel)
    return _Work(
        grid=grid, constants=wf.constants, psi=psi, rho=rho, rho_f=rho_f,
        mask=mask, drho=drho, ddrho=ddrho, J=J, u_raw=u_raw, u=u,
        div_u=div_u, w=w, ell2=ell2, v_i=v_i, internal=internal, Pi=Pi,
        Q=Q, polar=polar,
    )


def madelung_fields(
    wf: WaveFunction,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
    *,
    bohm_form: str = "amplitude",
    region_mask: np.ndarray | None = None,
) -> MadelungFields:
    """All hydrodynamic fields of one snapshot.

    region_mask, when given, further restricts valid_mask (used to confine
    windowed states to their interior); the fields themselves are global.
    """
    wk = _compute(wf, floor_rel, bohm_form, region_mask)
    g = wk.grid
    return MadelungFields(
        rho=RealField(wk.rho, g),
        S=wk.polar.S,
        u=RealField(wk.u, g),
        div_u=RealField(wk.div_u, g),
        Q_tilde=RealField(wk.Q, g),
        Pi=RealField(wk.Pi, g),
        internal_density=RealField(wk.internal, g),
        v_i=RealField(wk.v_i, g),
        kinetic_density=RealField(0.5 * wk.u * wk.u, g),
        valid_mask=wk.mask,
        constants=wk.constants,
    )


def velocity(wf: WaveFunction, floor_rel: float = DEFAULT_DENSITY_FLOOR) -> RealField:
    """Flow velocity u = J/rho, extended to masked points by nearest value."""
    wk = _compute(wf, floor_rel, "log", None)
    return RealField(wk.u, wk.grid)


def phase_gradient_velocity(
    wf: WaveFunction, floor_rel: float = DEFAULT_DENSITY_FLOOR
) -> RealField:
    """Cross-check velocity from the unwrapped phase, u = d(S/m)/dx.

    The unwrapped S is not periodic (it winds for traveling states), so this
    route uses central finite differences instead of the spectral derivative;
    it exists to validate the J/rho path, not to replace it.  The mask is
    eroded by one point on each side so no stencil touches the constant
    extension of S outside the valid region.
    """
    polar = polar_decompose(wf, floor_rel)
    s_tilde = polar.S.values / wf.constants.mass
    grad = np.gradient(s_tilde, wf.grid.dx, edge_order=2)
    mask = polar.valid_mask
    core = mask & np.roll(mask, 1) & np.roll(mask, -1)
    if not np.any(core):
        raise ValueError("valid mask too thin for a finite-difference stencil")
    return RealField(nearest_fill(grad, core), wf.grid)


def bohm_potential(
    rho: RealField,
    constants: PhysicalConstants,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
) -> RealField:
    """Bohm potential per unit mass from the amplitude: -(hbar^2/2m^2) a''/a."""
    vals = np.asarray(rho.values)
    if np.any(vals < 0.0):
        raise ValueError("density must be nonnegative")
    rho_max = float(vals.max())
    if rho_max <= 0.0:
        raise ValueError("density is identically zero")
    floor = floor_rel * rho_max
    if not np.any(vals >= floor):
        raise ValueError("density floor leaves no valid points")
    a = np.sqrt(vals)
    dda = derivative_values(a, rho.grid, 2).real
    c_q = constants.hbar**2 / (2.0 * constants.mass**2)
    return RealField(-c_q * dda / np.sqrt(np.maximum(vals, floor)), rho.grid)


def bohm_potential_log_form(
    rho: RealField,
    constants: PhysicalConstants,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
) -> RealField:
    """Same potential through the log-density identity
    a''/a = d2(ln rho)/dx2 + (1/2)(dln rho/dx)^2 scaled to rho."""
    vals = np.asarray(rho.values)
    rho_max = float(vals.max())
    if rho_max <= 0.0:
        raise ValueError("density is identically zero")
    rho_f = np.maximum(vals, floor_rel * rho_max)
    drho = derivative_values(vals, rho.grid, 1).real
    ddrho = derivative_values(vals, rho.grid, 2).real
    w = drho / rho_f
    ell2 = ddrho / rho_f - w * w
    half = constants.hbar / (2.0 * constants.mass)
    return RealField(-(half * half) * (ell2 + 0.5 * w * w), rho.grid)


def bohm_potential_curvature_form(
    wf: WaveFunction, floor_rel: float = DEFAULT_DENSITY_FLOOR
) -> RealField:
    """Bohm potential from the wavefunction curvature,
    Q~ = -(hbar^2/2m^2) Re(psi''/psi) - u^2/2.

    Equivalent to the amplitude form wherever rho > 0, and the only
    well-conditioned route when sqrt(rho) has kinks at density nodes.
    """
    wk = _compute(wf, floor_rel, "wavefunction", None)
    return RealField(wk.Q, wk.grid)


def pseudo_pressure(
    rho: RealField,
    constants: PhysicalConstants,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
) -> RealField:
    """Pressure-like field Pi = -(hbar/2m)^2 rho d2(ln rho)/dx2, zero gauge."""
    vals = np.asarray(rho.values)
    rho_max = float(vals.max())
    if rho_max <= 0.0:
        raise ValueError("density is identically zero")
    floor = floor_rel * rho_max
    if not np.any(vals >= floor):
        raise ValueError("density floor leaves no valid points")
    rho_f = np.maximum(vals, floor)
    drho = derivative_values(vals, rho.grid, 1).real
    ddrho = derivative_values(vals, rho.grid, 2).real
    w = drho / rho_f
    half = constants.hbar / (2.0 * constants.mass)
    return RealField(-(half * half) * (ddrho * (vals / rho_f) - vals * w * w), rho.grid)


def fisher_information(rho: RealField, floor_rel: float = DEFAULT_DENSITY_FLOOR) -> float:
    """FI = integral of rho (dln rho/dx)^2 over the valid mask."""
    vals = np.asarray(rho.values)
    rho_max = float(vals.max())
    if rho_max <= 0.0:
        raise ValueError("density is identically zero")
    mask = vals >= floor_rel * rho_max
    if not np.any(mask):
        raise ValueError("density floor leaves no valid points")
    rho_f = np.maximum(vals, floor_rel * rho_max)
    drho = derivative_values(vals, rho.grid, 1).real
    w = drho / rho_f
    integrand = np.where(mask, vals * w * w, 0.0)
    return float(np.sum(integrand) * rho.grid.dx)


def expectations(
    wf: WaveFunction,
    U: RealField,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
    *,
    t: float = 0.0,
    bohm_form: str = "amplitude",
) -> ExpectationReport:
    """Scalar expectation values of one snapshot against a potential U.

    The acceleration expectation is the volume force form
    -<d(Q~+U~)/dx> realized by discrete integration by parts as
    +integral (Q~+U~) drho/dx dx, which is exact under the periodic
    quadrature and free of mask-edge differentiation noise.
    """
    wk = _compute(wf, floor_rel, bohm_form, None)
    grid, dx = wk.grid, wk.grid.dx
    hbar, m = wk.constants.hbar, wk.constants.mass
    rho = wk.rho

    norm = float(np.sum(rho) * dx)
    K = float(np.sum(rho * 0.5 * wk.u_raw**2) * dx)
    Q = float(np.sum(rho * wk.Q) * dx)
    u_ext = U.values / m
    Uexp = float(np.sum(rho * u_ext) * dx)
    I = float(np.sum(rho * wk.internal) * dx)
    E = K + Q + Uexp

    ddpsi = derivative_values(wk.psi, grid, 2)
    kin_quad = -(hbar**2 / (2.0 * m)) * float(np.sum((wk.psi.conj() * ddpsi).real) * dx)
    E_ham = (kin_quad + float(np.sum(U.values * rho) * dx)) / m
    gap = abs(E - E_ham)
    if gap > 1e-9 * max(1.0, abs(E_ham)):
        raise DiagnosticsError(
            f"energy forms disagree: sum {E!r} vs Hamiltonian {E_ham!r}"
        )

    mask = wk.mask
    fi_integrand = np.where(mask, rho * wk.w**2, 0.0)
    FI = float(np.sum(fi_integrand) * dx)

    accel = float(np.sum((wk.Q + u_ext) * wk.drho) * dx)
    vi_mean = float(np.sum(rho * wk.v_i) * dx)
    Pi_integral = float(np.sum(wk.Pi) * dx)

    return ExpectationReport(
        t=t, norm=norm, K=K, Q=Q, U=Uexp, I=I, E=E, E_hamiltonian=E_ham,
        FI=FI, accel=accel, vi_mean=vi_mean, Pi_integral=Pi_integral,
    )


def bernoulli_residual(
    wf_prev: WaveFunction,
    wf_next: WaveFunction,
    U: RealField,
    dt: float,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
    *,
    bohm_form: str = "amplitude",
) -> RealField:
    """Residual of dS~/dt + (K~ + Q~ + U~) = 0 between two snapshots.

    The phase rate is the central difference over dt with per-point nearest
    branch matching (2 pi hbar / m period); the energy fields are averaged
    between the two snapshots, which is the matching midpoint value.  Entries
    outside the joint valid mask are zero.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    wp = _compute(wf_prev, floor_rel, bohm_form, None)
    wn = _compute(wf_next, floor_rel, bohm_form, None)
    if wp.grid.n != wn.grid.n:
        raise ValueError("snapshots live on different grids")
    m = wp.constants.mass
    mask = wp.mask & wn.mask
    if not np.any(mask):
        raise ValueError("joint valid mask is empty")

    period = 2.0 * np.pi * wp.constants.hbar / m
    ds = (wn.polar.S.values - wp.polar.S.values) / m
    ds -= period * np.round(ds / period)
    rate = ds / dt

    u_ext = U.values / m
    h_prev = 0.5 * wp.u_raw**2 + wp.Q + u_ext
    h_next = 0.5 * wn.u_raw**2 + wn.Q + u_ext
    residual = rate + 0.5 * (h_prev + h_next)
    return RealField(np.where(mask, residual, 0.0), wp.grid)


def nonspreading_residual(fields: MadelungFields, U: RealField) -> float:
    """Deviation of Q~ + U~ from a linear-in-x profile on the valid mask.

    Least-squares fit of a + b x; returns the maximum absolute fit residual
    normalized by the field's spread (its range, guarded by its magnitude so
    constant profiles do not divide by zero).
    """
    mask = fields.valid_mask
    if int(np.sum(mask)) < 16:
        raise ValueError("valid mask spans fewer than 16 points")
    grid = fields.rho.grid
    f = fields.Q_tilde.values[mask] + U.values[mask] / fields.constants.mass
    x = grid.x[mask]
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, f, rcond=None)
    resid = f - design @ coef
    denom = max(float(np.ptp(f)), float(np.max(np.abs(f))))
    if denom == 0.0:
        return 0.0
    return float(np.max(np.abs(resid)) / denom)
