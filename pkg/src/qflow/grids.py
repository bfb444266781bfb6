"""Uniform periodic 1D grid, wavefunction container, and spectral transforms.

Conventions used throughout the package:

* grid points  x_j = x_min + j*dx,  j = 0..n-1,  dx = (x_max - x_min)/n
  (periodic; x_max is excluded),
* momentum lattice  p_k = hbar * 2*pi * fftfreq(n, dx),  spacing
  dp = 2*pi*hbar / (n*dx),
* Fourier pair  psi(x) = (2*pi*hbar)^(-1/2) * Int phi(p) e^{i p x / hbar} dp,
  so a grid plane wave e^{i k0 x} maps to a single spike at p = hbar*k0
  and Parseval holds exactly on the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridError, StateError

NORM_TOL = 1e-10


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic spatial grid on [x_min, x_max)."""

    x_min: float
    x_max: float
    n: int

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    def dp(self, hbar: float = 1.0) -> float:
        """Momentum-lattice spacing 2*pi*hbar/(n*dx)."""
        return 2.0 * np.pi * hbar / (self.n * self.dx)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT order (p = hbar*k)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def index_of(self, x: float) -> int:
        """Nearest grid index for position x (must lie on the grid span)."""
        j = int(round((x - self.x_min) / self.dx))
        if j < 0 or j >= self.n:
            raise GridError(f"position {x} outside grid [{self.x_min}, {self.x_max})")
        return j


def make_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    """Build a grid; n must be a power of two >= 16 for the spectral transforms."""
    if not (x_max > x_min):
        raise GridError(f"degenerate interval [{x_min}, {x_max}]")
    if n < 16 or not _is_power_of_two(n):
        raise GridError(f"grid size n={n} must be a power of two >= 16")
    return Grid1D(float(x_min), float(x_max), int(n))


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes on a Grid1D, with the units (hbar, mass) they evolve under."""

    grid: Grid1D
    amplitudes: np.ndarray
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0 or self.mass <= 0:
            raise StateError("hbar and mass must be positive")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.n,):
            raise StateError(
                f"amplitude array of shape {amps.shape} does not match grid n={self.grid.n}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dx)

    def rho(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def with_amplitudes(self, amps: np.ndarray) -> "WaveFunction":
        return WaveFunction(self.grid, amps, self.hbar, self.mass)


@dataclass(frozen=True)
class MomentumAmplitudes:
    """Momentum-space amplitudes phi(p) on the ascending conjugate lattice."""

    grid: Grid1D
    p: np.ndarray
    values: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.complex128)
        p.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "values", v)

    @property
    def dp(self) -> float:
        return self.grid.dp(self.hbar)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.dp)


def normalize(psi: WaveFunction) -> WaveFunction:
    """Scale psi to unit norm; error on an identically-zero state."""
    nsq = psi.norm_squared()
    if nsq <= 0.0 or not np.isfinite(nsq):
        raise StateError("cannot normalize a zero (or non-finite) state")
    return psi.with_amplitudes(psi.amplitudes / np.sqrt(nsq))


def inner_product(phi: WaveFunction, psi: WaveFunction) -> complex:
    """Riemann-sum <phi|psi> = sum conj(phi_i) psi_i dx; grids must match."""
    if phi.grid != psi.grid:
        raise GridError("inner_product operands live on different grids")
    return complex(np.sum(np.conj(phi.amplitudes) * psi.amplitudes) * phi.grid.dx)


def to_momentum_space(psi: WaveFunction) -> MomentumAmplitudes:
    """Discrete transform to phi(p), ascending p axis.

    phi(p_k) = dx/sqrt(2*pi*hbar) * e^{-i p_k x_min/hbar} * FFT(psi)_k,
    which makes e^{i k0 x} a single spike at p = hbar*k0 and preserves the
    norm (Parseval) on the lattice.
    """
    g = psi.grid
    hbar = psi.hbar
    p = hbar * g.wavenumbers()
    raw = np.fft.fft(psi.amplitudes)
    phi = g.dx / np.sqrt(2.0 * np.pi * hbar) * np.exp(-1j * p * g.x_min / hbar) * raw
    order = np.fft.fftshift(np.arange(g.n))
    return MomentumAmplitudes(g, np.fft.fftshift(p), phi[order], hbar)


def from_momentum_space(phi: MomentumAmplitudes, mass: float = 1.0) -> WaveFunction:
    """Inverse of to_momentum_space (exact round trip on the lattice)."""
    g = phi.grid
    hbar = phi.hbar
    vals = np.fft.ifftshift(phi.values)
    p = hbar * g.wavenumbers()
    raw = vals * np.exp(1j * p * g.x_min / hbar) * np.sqrt(2.0 * np.pi * hbar) / g.dx
    return WaveFunction(g, np.fft.ifft(raw), hbar, mass)


def spectral_derivative(psi: WaveFunction) -> np.ndarray:
    """d(psi)/dx computed in momentum space (band-limited exact)."""
    k = psi.grid.wavenumbers()
    return np.fft.ifft(1j * k * np.fft.fft(psi.amplitudes))


def apply_momentum_operator(psi: WaveFunction) -> WaveFunction:
    """P acting on psi: -i*hbar*d/dx via the spectral derivative."""
    return psi.with_amplitudes(-1j * psi.hbar * spectral_derivative(psi))


def position_expectation(psi: WaveFunction) -> float:
    return float(np.sum(psi.grid.x * psi.rho()) * psi.grid.dx)

def position_variance(psi: WaveFunction) -> float:
    x0 = position_expectation(psi)
    return float(np.sum((psi.grid.x - x0) ** 2 * psi.rho()) * psi.grid.dx)


def momentum_expectation(psi: WaveFunction) -> float:
    phi = to_momentum_space(psi)
    return float(np.sum(phi.p * np.abs(phi.values) ** 2) * phi.dp)
