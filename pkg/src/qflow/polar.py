"""Polar fields R, S and everything derived from them.

Writing psi = R exp(i S / hbar) gives, per grid point,

    momentum          p(x)   = dS/dx
    quantum potential Q(x)   = -(hbar^2 / 2m) R''(x) / R(x)
    osmotic momentum  po(x)  = hbar R'(x) / R(x)

together with the current-density identity T0j = hbar Im(psi* dpsi/dx)
= rho dS/dx and the local energy T00 = -rho dS/dt. The two evolution
residuals check

    d(rho)/dt + d/dx (rho dS/dx / m)             = 0          (continuity)
    dS/dt + (dS/dx)^2/2m + Q + V                 = 0          (quantum H-J)

on evolved series. S is undefined at nodes of the wavefunction, so every
derived field carries a node mask (rho below eta times its peak, dilated
by two grid points, the stencil half-width).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .differences import (
    central_first,
    central_first_from_increments,
    central_second,
    dilate_mask,
)
from .errors import StateError
from .grids import Grid1D, WaveFunction, spectral_derivative
from .schrodinger import EvolutionSeries, Potential, total_energy

NODE_ETA = 1e-8
MASK_DILATION = 2


@dataclass(frozen=True)
class FieldOnGrid:
    """Real field aligned to a grid; mask is True where the value is invalid."""

    grid: Grid1D
    values: np.ndarray
    mask: np.ndarray
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        m = np.asarray(self.mask, dtype=bool)
        v.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m)

    def valid_values(self) -> np.ndarray:
        return self.values[~self.mask]

    def max_abs(self) -> float:
        vals = self.valid_values()
        return float(np.max(np.abs(vals))) if len(vals) else 0.0


@dataclass(frozen=True)
class PolarFields:
    """Amplitude R, unwrapped action-valued phase S, density rho, node mask."""

    grid: Grid1D
    R: np.ndarray
    S: np.ndarray
    rho: np.ndarray
    node_mask: np.ndarray
    hbar: float
    mass: float
    eta: float

    @property
    def mask(self) -> np.ndarray:
        """Node mask dilated to protect five-point derivative stencils."""
        return dilate_mask(self.node_mask, MASK_DILATION)

    def field(self, values: np.ndarray, name: str = "") -> FieldOnGrid:
        return FieldOnGrid(self.grid, values, self.mask, name)


def _unwrap_from(theta: np.ndarray, anchor: int) -> np.ndarray:
    """Unwrap angles walking left and right from `anchor` (theta[anchor] kept raw).

    Equivalent to a plain left-to-right unwrap shifted by the 2*pi multiple
    that restores the raw angle at the anchor, where the phase is best
    conditioned.
    """
    out = np.unwrap(theta)
    out += 2.0 * np.pi * np.round((theta[anchor] - out[anchor]) / (2.0 * np.pi))
    return out


def polar_decompose(psi: WaveFunction, eta: float = NODE_ETA) -> PolarFields:
    """Split psi into R >= 0 and continuous S, unwrapping from the density peak.

    The peak is the best-conditioned point for the phase; unwrapping walks
    outward in both directions (implemented as one periodic walk). Off-mask,
    R exp(iS/hbar) reproduces psi to machine precision; at masked nodes the
    phase entries are present but meaningless.
    """
    amps = psi.amplitudes
    R = np.abs(amps)
    rho = R * R
    node_mask = rho < eta * rho.max()
    anchor = int(np.argmax(rho))
    theta = np.angle(amps)
    S = psi.hbar * _unwrap_from(theta, anchor)
    return PolarFields(psi.grid, R, S, rho, node_mask, psi.hbar, psi.mass, eta)


def polar_series(series: EvolutionSeries, eta: float = NODE_ETA) -> list[PolarFields]:
    """Decompose every slice with time-consistent global phase offsets.

    The global 2*pi*hbar branch of each slice is pinned by minimizing the
    phase change at the current density maximum between consecutive times,
    making dS/dt meaningful.
    """
    out: list[PolarFields] = []
    prev: PolarFields | None = None
    for state in series.states:
        pf = polar_decompose(state, eta)
        if prev is not None:
            m = int(np.argmax(pf.rho))
            two_pi = 2.0 * np.pi * pf.hbar
            k = np.round((prev.S[m] - pf.S[m]) / two_pi)
            if k != 0:
                pf = PolarFields(
                    pf.grid, pf.R, pf.S + k * two_pi, pf.rho, pf.node_mask,
                    pf.hbar, pf.mass, pf.eta,
                )
        out.append(pf)
        prev = pf
    return out


def phase_gradient(pf: PolarFields) -> np.ndarray:
    """dS/dx by central differences on wrapped phase increments.

    The unwrapped S is periodic only up to its winding term (e.g. a plane
    wave), so the stencil acts on adjacent-point increments wrapped into
    (-pi*hbar, pi*hbar], which are genuinely periodic.
    """
    s = pf.S
    two_pi_h = 2.0 * np.pi * pf.hbar
    d = np.empty_like(s)
    d[:-1] = s[1:] - s[:-1]
    seam = s[0] - s[-1]
    d[-1] = seam - two_pi_h * np.round(seam / two_pi_h)
    return central_first_from_increments(d, pf.grid.dx)


def bohm_momentum(pf: PolarFields) -> FieldOnGrid:
    """dS/dx by central differences, masked near nodes."""
    return pf.field(phase_gradient(pf), "bohm_momentum")


def quantum_potential(pf: PolarFields) -> FieldOnGrid:
    """Q = -(hbar^2 / 2m) R''/R by central second differences."""
    with np.errstate(divide="ignore", invalid="ignore"):
        q = -(pf.hbar**2) / (2.0 * pf.mass) * central_second(pf.R, pf.grid.dx) / pf.R
    q = np.where(pf.mask, 0.0, q)
    return pf.field(q, "quantum_potential")


def osmotic_momentum(pf: PolarFields) -> FieldOnGrid:
    """hbar R'/R, the osmotic momentum (imaginary weak-momentum partner)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        po = pf.hbar * central_first(pf.R, pf.grid.dx) / pf.R
    po = np.where(pf.mask, 0.0, po)
    return pf.field(po, "osmotic_momentum")


def _interior_mask(polars: list[PolarFields], i: int) -> np.ndarray:
    return polars[i - 1].mask | polars[i].mask | polars[i + 1].mask


def continuity_residual(series: EvolutionSeries, eta: float = NODE_ETA) -> float:
    """Max-norm residual of d(rho)/dt + d/dx(rho dS/dx / m) at interior times."""
    if len(series) < 3:
        raise StateError("continuity residual needs at least 3 stored states")
    polars = polar_series(series, eta)
    dt = series.dt
    dx = series.states[0].grid.dx
    worst = 0.0
    for i in range(1, len(polars) - 1):
        drho_dt = (polars[i + 1].rho - polars[i - 1].rho) / (2.0 * dt)
        flux = polars[i].rho * phase_gradient(polars[i]) / polars[i].mass
        res = drho_dt + central_first(flux, dx)
        ok = ~_interior_mask(polars, i)
        if ok.any():
            worst = max(worst, float(np.max(np.abs(res[ok]))))
    return worst


def qhj_residual(series: EvolutionSeries, potential: Potential, eta: float = NODE_ETA) -> float:
    """Max-norm residual of dS/dt + (dS/dx)^2/2m + Q + V at interior times."""
    if len(series) < 3:
        raise StateError("quantum Hamilton-Jacobi residual needs at least 3 stored states")
    polars = polar_series(series, eta)
    dt = series.dt
    grid = series.states[0].grid
    v = potential.values(grid, series.states[0].mass)
    worst = 0.0
    for i in range(1, len(polars) - 1):
        pf = polars[i]
        ds_dt = (polars[i + 1].S - polars[i - 1].S) / (2.0 * dt)
        grad_s = phase_gradient(pf)
        q = quantum_potential(pf).values
        res = ds_dt + grad_s**2 / (2.0 * pf.mass) + q + v
        ok = ~_interior_mask(polars, i)
        if ok.any():
            worst = max(worst, float(np.max(np.abs(res[ok]))))
    return worst


def energy_momentum_components(
    psi: WaveFunction, series: EvolutionSeries, eta: float = NODE_ETA
) -> tuple[FieldOnGrid, FieldOnGrid]:
    """(T00, T0j) for a state that is an interior slice of `series`.

    T0j = hbar Im(psi* dpsi/dx) with the spectral derivative, so T0j/rho is
    the momentum field; the sign makes a right-moving plane wave positive.
    T00 = -hbar Im(psi* dpsi/dt) with a centered time difference over the
    neighboring slices, so T00/rho is the local energy -dS/dt.
    """
    idx = None
    for i, s in enumerate(series.states):
        if s is psi or np.array_equal(s.amplitudes, psi.amplitudes):
            idx = i
            break
    if idx is None:
        raise StateError("psi is not a member of the series")
    if idx == 0 or idx == len(series) - 1:
        raise StateError("T00 needs an interior slice (centered time difference)")

    pf = polar_decompose(psi, eta)
    dpsi_dx = spectral_derivative(psi)
    t0j = psi.hbar * np.imag(np.conj(psi.amplitudes) * dpsi_dx)

    dpsi_dt = (series.states[idx + 1].amplitudes - series.states[idx - 1].amplitudes) / (
        2.0 * series.dt
    )
    t00 = -psi.hbar * np.imag(np.conj(psi.amplitudes) * dpsi_dt)
    return pf.field(t00, "T00"), pf.field(t0j, "T0j")


@dataclass(frozen=True)
class TraceCheckReport:
    """Pointwise kinetic split and its integral balance against <H>."""

    kinetic_bohm: FieldOnGrid
    kinetic_osmotic: FieldOnGrid
    integral_energy: float
    reference_energy: float

    @property
    def relative_deviation(self) -> float:
        scale = max(abs(self.reference_energy), 1e-300)
        return abs(self.integral_energy - self.reference_energy) / scale

    def passes(self, tolerance: float = 5e-3) -> bool:
        return self.relative_deviation < tolerance


def kinetic_trace_check(
    pf: PolarFields, potential: Potential, psi: WaveFunction
) -> TraceCheckReport:
    """Split kinetic energy into flow and osmotic parts and balance the total.

    KE_B = (dS/dx)^2 / 2m and KE_O = hbar^2 (R'/R)^2 / 2m; the report compares
    Int rho (KE_B + KE_O + V) dx with the spectral total energy.
    """
    grid = pf.grid
    ke_b = phase_gradient(pf) ** 2 / (2.0 * pf.mass)
    po = osmotic_momentum(pf).values
    ke_o = po**2 / (2.0 * pf.mass)
    ok = ~pf.mask
    v = potential.values(grid, pf.mass)
    integral = float(np.sum((pf.rho * (ke_b + ke_o + v))[ok]) * grid.dx)
    reference = total_energy(psi, potential)
    return TraceCheckReport(
        pf.field(ke_b, "KE_B"), pf.field(ke_o, "KE_O"), integral, reference
    )
