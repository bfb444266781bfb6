"""Discrete path machinery: short-time amplitudes, kink momenta, lattice sums.

A path is a chain of positions x_0..x_N at time spacing epsilon. Each link
carries the free short-time action S(x, x') = m (x - x')^2 / (2 epsilon)
and the amplitude

    A(eps) exp(i S / hbar),   A(eps) = sqrt(m / (2 pi i hbar eps)),

whose product, summed over interior positions, reproduces the free
propagator sqrt(m/(2 pi i hbar T)) exp(i m (x-x')^2 / 2 hbar T). The bare
exponential alone cannot; the normalization per slice is required for the
composition law to close, so it is part of the amplitude here.

At an interior vertex X between x' and x the action derivative is
one-sided: a backward momentum m(X - x')/eps and a forward momentum
m(x - X)/eps. Their difference p_X vanishes only on straight segments;
for paths sampled with the diffusive step scale hbar*eps/m of the free
kernel, its mean magnitude grows like eps^(-1/2), which is the lattice
statement that the paths are continuous but nowhere differentiable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, StateError
from .grids import Grid1D, WaveFunction, position_variance
from .wigner import conditional_momentum_integral

EXHAUSTIVE_LIMIT = 10**7


@dataclass(frozen=True)
class PathLattice:
    """Spatial grid, slice count, and time step for discrete path sums."""

    grid: Grid1D
    n_slices: int
    epsilon: float
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise StateError("epsilon must be positive")
        if self.n_slices < 1:
            raise StateError("a path lattice needs at least one slice")

    @property
    def total_time(self) -> float:
        return self.n_slices * self.epsilon


@dataclass(frozen=True)
class DiscretePath:
    """Positions x_0..x_N matching a lattice's slice count."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    def validate(self, lattice: PathLattice) -> None:
        if len(self.positions) != lattice.n_slices + 1:
            raise StateError(
                f"path has {len(self.positions)} vertices, lattice wants {lattice.n_slices + 1}"
            )


@dataclass(frozen=True)
class MomentumTPA:
    """Backward/forward one-sided momenta at a vertex and their mismatch."""

    backward: float
    forward: float

    @property
    def p_x(self) -> float:
        return self.backward - self.forward


def short_time_action(x: float, x_prev: float, epsilon: float, mass: float = 1.0) -> float:
    """Free-particle action of one link, m (x - x')^2 / (2 eps)."""
    if epsilon <= 0:
        raise StateError("epsilon must be positive")
    return mass * (x - x_prev) ** 2 / (2.0 * epsilon)


def amplitude_prefactor(epsilon: float, mass: float = 1.0, hbar: float = 1.0) -> complex:
    """A(eps) = sqrt(m / (2 pi i hbar eps)), principal branch (phase -pi/4)."""
    return complex(np.sqrt(mass / (2.0 * np.pi * 1j * hbar * epsilon)))


def transition_amplitude(
    x: float, x_prev: float, epsilon: float, mass: float = 1.0, hbar: float = 1.0
) -> complex:
    """<x|x'> for one time slice: A(eps) exp(i S(x, x') / hbar)."""
    s = short_time_action(x, x_prev, epsilon, mass)
    return amplitude_prefactor(epsilon, mass, hbar) * np.exp(1j * s / hbar)


def momentum_tpa(
    x_prev: float, x_mid: float, x_next: float, epsilon: float, mass: float = 1.0
) -> MomentumTPA:
    """One-sided momenta at the vertex x_mid of the kink (x', X, x)."""
    if epsilon <= 0:
        raise StateError("epsilon must be positive")
    backward = mass * (x_mid - x_prev) / epsilon
    forward = mass * (x_next - x_mid) / epsilon
    return MomentumTPA(backward, forward)


def path_amplitude(path: DiscretePath, lattice: PathLattice) -> complex:
    """Product of the N short-time amplitudes along the path."""
    path.validate(lattice)
    pos = path.positions
    actions = lattice.mass * np.diff(pos) ** 2 / (2.0 * lattice.epsilon)
    pref = amplitude_prefactor(lattice.epsilon, lattice.mass, lattice.hbar)
    return complex(pref ** lattice.n_slices * np.exp(1j * np.sum(actions) / lattice.hbar))


def free_propagator(
    x_end: float, x_start: float, total_time: float, mass: float = 1.0, hbar: float = 1.0
) -> complex:
    """Exact free propagator sqrt(m/2 pi i hbar T) exp(i m (x-x')^2 / 2 hbar T)."""
    pref = np.sqrt(mass / (2.0 * np.pi * 1j * hbar * total_time))
    return complex(pref * np.exp(1j * mass * (x_end - x_start) ** 2 / (2.0 * hbar * total_time)))


def _link_amplitudes(
    x_to: np.ndarray, x_from: np.ndarray, lattice: PathLattice
) -> np.ndarray:
    s = lattice.mass * np.subtract.outer(x_to, x_from) ** 2 / (2.0 * lattice.epsilon)
    pref = amplitude_prefactor(lattice.epsilon, lattice.mass, lattice.hbar)
    return pref * np.exp(1j * s / lattice.hbar)


@dataclass(frozen=True)
class PropagatorEstimate:
    value: complex
    stderr: float = 0.0
    samples: int = 0


def exhaustive_propagator(x_start: float, x_end: float, lattice: PathLattice) -> complex:
    """Sum of path_amplitude * dx^(N-1) over every interior lattice assignment.

    Evaluated as a chained contraction over slices, which regroups the same
    finite sum without changing any term; the n^(N-1) enumeration bound
    keeps it honest about the configuration count.
    """
    g = lattice.grid
    n_interior = lattice.n_slices - 1
    if n_interior > 0 and g.n**n_interior > EXHAUSTIVE_LIMIT:
        raise StateError(
            f"exhaustive mode would enumerate {g.n}^{n_interior} > {EXHAUSTIVE_LIMIT} configurations"
        )
    if n_interior == 0:
        return transition_amplitude(x_end, x_start, lattice.epsilon, lattice.mass, lattice.hbar)
    x = g.x
    v = _link_amplitudes(x, np.array([x_start]), lattice)[:, 0]
    for _ in range(n_interior - 1):
        new_v = np.empty_like(v)
        chunk = max(1, 2**22 // g.n)
        for lo in range(0, g.n, chunk):
            block = _link_amplitudes(x[lo : lo + chunk], x, lattice)
            new_v[lo : lo + chunk] = block @ v
        v = new_v * g.dx
    tail = _link_amplitudes(np.array([x_end]), x, lattice)[0]
    return complex(np.sum(tail * v) * g.dx)


def monte_carlo_propagator(
    x_start: float,
    x_end: float,
    lattice: PathLattice,
    samples: int,
    seed: int = 0,
) -> PropagatorEstimate:
    """Flat-measure Monte Carlo estimate of the interior lattice sum.

    Interior positions are drawn uniformly over the lattice points (so the
    estimator targets exactly the exhaustive sum) and weighted by the
    complex path amplitude, with no importance sampling; the standard error
    combines the real and imaginary component variances.
    """
    g = lattice.grid
    n_interior = lattice.n_slices - 1
    if n_interior == 0:
        return PropagatorEstimate(
            transition_amplitude(x_end, x_start, lattice.epsilon, lattice.mass, lattice.hbar)
        )
    rng = np.random.default_rng(seed)
    interior = g.x[rng.integers(0, g.n, size=(samples, n_interior))]
    pos = np.concatenate(
        [np.full((samples, 1), x_start), interior, np.full((samples, 1), x_end)], axis=1
    )
    actions = lattice.mass * np.sum(np.diff(pos, axis=1) ** 2, axis=1) / (2.0 * lattice.epsilon)
    pref = amplitude_prefactor(lattice.epsilon, lattice.mass, lattice.hbar) ** lattice.n_slices
    weights = pref * np.exp(1j * actions / lattice.hbar)
    volume = g.length**n_interior
    vals = volume * weights
    mean = complex(np.mean(vals))
    var = (np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1)) / samples
    return PropagatorEstimate(mean, float(np.sqrt(var)), samples)


def lattice_propagator(
    x_start: float,
    x_end: float,
    lattice: PathLattice,
    mode: str = "exhaustive",
    mc_samples: int = 200_000,
    seed: int = 0,
    mc_tolerance: float | None = None,
) -> complex:
    """Propagator between fixed endpoints by exhaustive or Monte Carlo summation."""
    if mode == "exhaustive":
        return exhaustive_propagator(x_start, x_end, lattice)
    if mode == "monte_carlo":
        est = monte_carlo_propagator(x_start, x_end, lattice, mc_samples, seed)
        if mc_tolerance is not None and est.stderr > mc_tolerance:
            raise NumericalError(
                f"Monte Carlo standard error {est.stderr:.3e} exceeds tolerance {mc_tolerance:.3e}"
            )
        return est.value
    raise StateError(f"unknown propagator mode '{mode}'")


# ---------------------------------------------------------------------------
# spray average and path roughness


def spray_mean_momentum(
    psi: WaveFunction, x: float, epsilon: float, timescale_fraction: float = 0.1
) -> float:
    """Mean momentum at X from the incoming/outgoing momentum sprays.

    The incoming spray is distributed per phi(p'), the outgoing per
    phi*(p); averaging with the exact midpoint constraint P = (p + p')/2 is
    the momentum-pair double sum, whose value is epsilon-independent once
    epsilon is small against the state's timescale m sigma_x^2 / hbar.
    Equals the phase gradient dS/dx(X).
    """
    if epsilon <= 0:
        raise StateError("epsilon must be positive")
    timescale = psi.mass * position_variance(psi) / psi.hbar
    if epsilon > timescale_fraction * timescale:
        raise StateError(
            f"epsilon={epsilon} too coarse: must be <= {timescale_fraction} * state timescale "
            f"({timescale:.3g})"
        )
    return conditional_momentum_integral(psi, x)


def sample_kernel_paths(
    lattice: PathLattice, x_start: float, count: int, seed: int = 0
) -> np.ndarray:
    """Random walks with the free-kernel diffusive step scale.

    Steps are Gaussian with variance hbar*eps/m, the magnitude scale of the
    short-time kernel under Wick rotation; rows are paths, columns slices.
    """
    rng = np.random.default_rng(seed)
    steps = rng.normal(
        0.0,
        np.sqrt(lattice.hbar * lattice.epsilon / lattice.mass),
        size=(count, lattice.n_slices),
    )
    pos = np.concatenate([np.zeros((count, 1)), np.cumsum(steps, axis=1)], axis=1)
    return x_start + pos


def mean_kink_momentum(paths: np.ndarray, epsilon: float, mass: float = 1.0) -> float:
    """Mean |p_X| over all interior vertices of the sampled paths."""
    backward = mass * (paths[:, 1:-1] - paths[:, :-2]) / epsilon
    forward = mass * (paths[:, 2:] - paths[:, 1:-1]) / epsilon
    return float(np.mean(np.abs(backward - forward)))


def roughness_scan(
    epsilons: np.ndarray,
    n_paths: int = 2000,
    n_slices: int = 16,
    seed: int = 0,
    mass: float = 1.0,
    hbar: float = 1.0,
    grid: Grid1D | None = None,
) -> tuple[float, list[tuple[float, float]]]:
    """Measure the growth exponent of mean |p_X| as epsilon shrinks.

    Returns (exponent, [(eps, mean_abs_p_x), ...]) with the exponent fitted
    as the negated log-log slope, so ideal nowhere-differentiable scaling
    gives 0.5.
    """
    if grid is None:
        from .grids import make_grid

        grid = make_grid(-64.0, 64.0, 16)
    table = []
    for i, eps in enumerate(np.asarray(epsilons, dtype=np.float64)):
        lattice = PathLattice(grid, n_slices, float(eps), mass, hbar)
        paths = sample_kernel_paths(lattice, 0.0, n_paths, seed=seed + i)
        table.append((float(eps), mean_kink_momentum(paths, float(eps), mass)))
    eps_arr = np.log([row[0] for row in table])
    val_arr = np.log([row[1] for row in table])
    slope = np.polyfit(eps_arr, val_arr, 1)[0]
    return float(-slope), table
