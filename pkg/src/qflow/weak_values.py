"""Weak values and position-post-selected weak momentum.

The weak value of an operator A between a pre-selected state psi and a
post-selected state phi is <phi|A psi> / <phi|psi>, generally complex.
Post-selecting on position X (a delta bra, realized as evaluation at a
grid point) turns the momentum weak value into

    p_w(X) = -i hbar psi'(X) / psi(X),

whose real part is the phase gradient dS/dx and whose imaginary part is
-hbar R'/R, the negated osmotic momentum. Flow lines integrated through
Re p_w / m therefore retrace the Bohm trajectories; both are computed
here so the agreement can be checked rather than assumed.

Weak values blow up when the post- and pre-selected states are nearly
orthogonal, so results carry the overlap magnitude and an ill-conditioned
flag instead of returning huge meaningless numbers.

Pre- and post-selection are evaluated at equal times (post-selection
immediately after the evolution that produced psi).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MaskedRegionError, StateError
from .grids import (
    WaveFunction,
    apply_momentum_operator,
    inner_product,
    normalize,
    spectral_derivative,
)
from .polar import NODE_ETA, polar_decompose
from .schrodinger import EvolutionSeries
from .trajectories import TrajectoryEnsemble, VelocityField

OVERLAP_FLOOR = 1e-10


@dataclass(frozen=True)
class WeakValueResult:
    value: complex | None
    overlap_magnitude: float
    postselection: float | None = None
    ill_conditioned: bool = False


def weak_value(
    op_apply: Callable[[WaveFunction], WaveFunction],
    phi_post: WaveFunction,
    psi_pre: WaveFunction,
    overlap_floor: float = OVERLAP_FLOOR,
) -> WeakValueResult:
    """<phi|A psi> / <phi|psi> by quadrature; A is supplied as its action."""
    overlap = inner_product(phi_post, psi_pre)
    scale = np.sqrt(phi_post.norm_squared() * psi_pre.norm_squared())
    if abs(overlap) <= overlap_floor * scale:
        return WeakValueResult(None, abs(overlap), ill_conditioned=True)
    numerator = inner_product(phi_post, op_apply(psi_pre))
    return WeakValueResult(complex(numerator / overlap), abs(overlap))


def weak_momentum_at(psi: WaveFunction, x: float, eta: float = NODE_ETA) -> WeakValueResult:
    """Momentum weak value with position post-selection at grid point X.

    Evaluates -i hbar psi'(X)/psi(X) with the spectral derivative, the
    delta-bra limit of a narrowing post-selection packet.
    """
    j = psi.grid.index_of(x)
    pf = polar_decompose(psi, eta)
    if pf.mask[j]:
        raise MaskedRegionError(f"weak momentum undefined at node region x={x}")
    dpsi = spectral_derivative(psi)
    value = -1j * psi.hbar * dpsi[j] / psi.amplitudes[j]
    return WeakValueResult(complex(value), float(np.abs(psi.amplitudes[j])), postselection=float(psi.grid.x[j]))


def weak_momentum_profile(psi: WaveFunction, eta: float = NODE_ETA) -> tuple[np.ndarray, np.ndarray]:
    """(complex p_w(x), mask) over the whole grid in one pass."""
    pf = polar_decompose(psi, eta)
    dpsi = spectral_derivative(psi)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = -1j * psi.hbar * dpsi / psi.amplitudes
    values = np.where(pf.mask, 0.0, values)
    return values, pf.mask


def weak_momentum_gaussian_postselected(
    psi: WaveFunction, x: float, width: float, overlap_floor: float = OVERLAP_FLOOR
) -> WeakValueResult:
    """Finite-width variant: post-select on a narrow Gaussian centered at X.

    Converges to weak_momentum_at(psi, X) as width -> 0 (within grid
    discretization error); kept for convergence studies of the delta limit.
    """
    if width <= 0:
        raise StateError("post-selection width must be positive")
    g = psi.grid
    packet = np.exp(-((g.x - x) ** 2) / (4.0 * width**2)).astype(complex)
    phi_post = normalize(WaveFunction(g, packet, psi.hbar, psi.mass))
    result = weak_value(apply_momentum_operator, phi_post, psi, overlap_floor)
    if result.ill_conditioned:
        return result
    return WeakValueResult(result.value, result.overlap_magnitude, postselection=float(x))


def weak_velocity_field(series: EvolutionSeries, eta: float = NODE_ETA) -> VelocityField:
    """Re(weak momentum)/m sampled on every stored slice of the series."""
    grid = series.states[0].grid
    vals = np.empty((len(series), grid.n))
    masks = np.empty_like(vals, dtype=bool)
    for i, state in enumerate(series.states):
        pw, mask = weak_momentum_profile(state, eta)
        vals[i] = np.real(pw) / state.mass
        masks[i] = mask
    return VelocityField(grid, series.times, vals, masks)


def weak_flow_lines(
    series: EvolutionSeries, seeds: np.ndarray, eta: float = NODE_ETA
) -> TrajectoryEnsemble:
    """Flow lines integrated through Re(weak momentum)/m.

    Same RK4 integrator and interpolation as the Bohm trajectories; the only
    difference is the derivative discretization behind the field (spectral
    here, central differences there), so the two ensembles should coincide
    to discretization accuracy.
    """
    return weak_velocity_field(series, eta).integrate(np.asarray(seeds, dtype=np.float64))
