"""Wigner transform and conditional mean momentum, two independent ways.

The conditional mean momentum at a point X is computed along two routes:

* integral form: the double sum over incoming and outgoing momentum
  components phi(p'), phi*(p) with the exact midpoint constraint
  P = (p + p')/2. Reorganized over pair diagonals theta = p - p'
  (p = P + theta/2, p' = P - theta/2) the constraint is exact on the
  lattice, with no delta binning bias:

      rho(X) Pbar(X) = (1/2 pi hbar) sum_theta e^{-i theta X / hbar}
                         sum_P P phi*(P + theta/2) phi(P - theta/2) dp^2

* derivative form: the point-split expression evaluated on the diagonal,
  hbar Im(psi* dpsi/dx)(X) / rho(X), with the spectral derivative.

Both should equal the phase gradient dS/dx; equivalence_report measures
the worst pairwise deviation among these routes plus the weak-momentum
and current-density (T0j/rho) routes.

The Wigner function itself is built from the point-split correlation
psi*(x - s/2) psi(x + s/2) over the even-offset lattice (s = 2 dx m), so
its momentum axis is half-spaced (dp/2) and spans half the position
Nyquist range; catalog states keep their momentum support well inside it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaskedRegionError, NumericalError, StateError
from .grids import WaveFunction, spectral_derivative, to_momentum_space
from .polar import NODE_ETA, bohm_momentum, polar_decompose
from .weak_values import weak_momentum_profile

IMAG_RESIDUE_TOL = 1e-8


@dataclass(frozen=True)
class WignerFunction:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (len(x), len(p)), real

    def __post_init__(self):
        for name in ("x", "p", "values"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def position_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def momentum_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.dx

    def conditional_moment(self) -> np.ndarray:
        """First momentum moment sum_P P W(x, P) dP = rho(x) Pbar(x)."""
        return self.values @ self.p * self.dp


def wigner_transform(psi: WaveFunction, eta: float = NODE_ETA, chunk: int = 256) -> WignerFunction:
    """W(x, P) from the point-split correlation; real to machine precision.

    The correlation C_j[m] = psi*(x_{j-m}) psi(x_{j+m}) is Hermitian in m,
    so the transform is real up to roundoff; the imaginary residue is
    checked against 1e-10 and discarded.

    For packet states (density below eta*max at the box edges, the standard
    packet precondition) the correlation treats psi as zero outside the box,
    which reproduces the straight-line Wigner function: Gaussians come out
    nonnegative with no periodic-image ghost between the packet and its
    wrapped copy. States that genuinely occupy the boundary (plane waves)
    keep the fully periodic correlation, which is exact for lattice
    eigenmodes.
    """
    g = psi.grid
    n = g.n
    amps = psi.amplitudes
    rho = np.abs(amps) ** 2
    periodic = max(rho[0], rho[-1]) >= eta * rho.max()

    m_signed = np.fft.fftfreq(n, 1.0 / n).astype(int)[None, :]
    w_real = np.empty((n, n))
    residue = 0.0
    for start in range(0, n, chunk):
        j = np.arange(start, min(start + chunk, n))[:, None]
        jm = j - m_signed
        jp = j + m_signed
        if periodic:
            corr = np.conj(amps[jm % n]) * amps[jp % n]
        else:
            valid = (jm >= 0) & (jm < n) & (jp >= 0) & (jp < n)
            corr = np.where(
                valid, np.conj(amps[np.clip(jm, 0, n - 1)]) * amps[np.clip(jp, 0, n - 1)], 0.0
            )
        block = (g.dx / (np.pi * psi.hbar)) * np.fft.fft(corr, axis=1)
        residue = max(residue, float(np.max(np.abs(block.imag))))
        w_real[start : start + len(j)] = block.real
    scale = float(np.max(np.abs(w_real)))
    if residue > 1e-10 * max(scale, 1.0):
        raise NumericalError(f"Wigner imaginary residue {residue:.2e} above tolerance")
    p_axis = np.fft.fftshift(psi.hbar * 2.0 * np.pi * np.fft.fftfreq(n, d=2.0 * g.dx))
    return WignerFunction(g.x, p_axis, np.fft.fftshift(w_real, axes=1))


def momentum_density_reference(psi: WaveFunction, p_axis: np.ndarray) -> np.ndarray:
    """|phi|^2 on an arbitrary half-spaced momentum axis via zero padding.

    Pads psi to a doubled domain (tails at the edges are below 1e-10 by
    state preconditions) so the transform lands exactly on dp/2 spacing.
    """
    g = psi.grid
    n2 = 2 * g.n
    padded = np.concatenate([psi.amplitudes, np.zeros(g.n, dtype=complex)])
    p_fine = psi.hbar * 2.0 * np.pi * np.fft.fftfreq(n2, d=g.dx)
    phi_fine = (
        g.dx
        / np.sqrt(2.0 * np.pi * psi.hbar)
        * np.exp(-1j * p_fine * g.x_min / psi.hbar)
        * np.fft.fft(padded)
    )
    dens = np.abs(phi_fine) ** 2
    order = np.argsort(p_fine)
    return np.interp(p_axis, p_fine[order], dens[order])


# ---------------------------------------------------------------------------
# conditional mean momentum, integral (midpoint-constrained double sum) form


def _diagonal_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """r_k = sum_s conj(a_{s+k}) b_s for k = -(n-1)..(n-1), via padded FFTs."""
    n = len(a)
    fa = np.fft.fft(a, 2 * n)
    fb = np.fft.fft(b, 2 * n)
    c = np.fft.ifft(np.conj(fa) * fb)
    ks = np.arange(-(n - 1), n)
    return c[(-ks) % (2 * n)]


def _theta_sums(psi: WaveFunction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diagonal sums of the momentum-pair lattice.

    Returns (theta values k*dp for k = -(n-1)..(n-1),
             momentum-weighted diagonal sums c_k,
             unweighted diagonal sums b_k), each already carrying dp^2.
    """
    phi = to_momentum_space(psi)
    vals = phi.values
    p = phi.p
    dp = phi.dp
    n = len(vals)
    half = 0.5 * (_diagonal_correlation(p * vals, vals) + _diagonal_correlation(vals, p * vals))
    c = half * dp**2
    b = _diagonal_correlation(vals, vals) * dp**2
    theta = dp * np.arange(-(n - 1), n)
    return theta, c, b


def _theta_sums_direct(psi: WaveFunction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Literal diagonal loop over momentum pairs; oracle for _theta_sums."""
    phi = to_momentum_space(psi)
    vals = phi.values
    p = phi.p
    dp = phi.dp
    n = len(vals)
    ks = np.arange(-(n - 1), n)
    c = np.zeros(len(ks), dtype=complex)
    b = np.zeros(len(ks), dtype=complex)
    for i, k in enumerate(ks):
        if k >= 0:
            hi = slice(k, n)
            lo = slice(0, n - k)
        else:
            hi = slice(0, n + k)
            lo = slice(-k, n)
        pair = np.conj(vals[hi]) * vals[lo]
        c[i] = np.sum(0.5 * (p[hi] + p[lo]) * pair) * dp**2
        b[i] = np.sum(pair) * dp**2
    return dp * ks, c, b


def conditional_momentum_profile(
    psi: WaveFunction, eta: float = NODE_ETA
) -> tuple[np.ndarray, np.ndarray]:
    """Integral-form Pbar at every grid point; returns (values, mask).

    Folds the theta sum onto the grid resonances so all positions come out
    of one transform; identical (to roundoff) to evaluating the double sum
    point by point.
    """
    g = psi.grid
    n = g.n
    hbar = psi.hbar
    theta, c, b = _theta_sums(psi)
    phase = np.exp(-1j * theta * g.x_min / hbar)
    ks = np.arange(-(n - 1), n)
    folded_num = np.zeros(n, dtype=complex)
    folded_den = np.zeros(n, dtype=complex)
    np.add.at(folded_num, ks % n, c * phase)
    np.add.at(folded_den, ks % n, b * phase)
    num = np.fft.fft(folded_num) / (2.0 * np.pi * hbar)
    den = np.fft.fft(folded_den) / (2.0 * np.pi * hbar)

    pf = polar_decompose(psi, eta)
    mask = pf.mask
    _check_imag_residue(num[~mask], den[~mask])
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num.real / den.real
    return np.where(mask, 0.0, out), mask


def _check_imag_residue(num: np.ndarray, den: np.ndarray) -> None:
    scale = max(float(np.max(np.abs(num))), float(np.max(np.abs(den))), 1e-300)
    residue = max(float(np.max(np.abs(num.imag))), float(np.max(np.abs(den.imag))))
    if residue > IMAG_RESIDUE_TOL * scale:
        raise NumericalError(
            f"conditional momentum imaginary residue {residue:.2e} above tolerance"
        )


def conditional_momentum_integral(psi: WaveFunction, x: float, eta: float = NODE_ETA) -> float:
    """Integral-form Pbar(X) at one grid point X (midpoint-constrained sum)."""
    g = psi.grid
    j = g.index_of(x)
    pf = polar_decompose(psi, eta)
    if pf.mask[j]:
        raise MaskedRegionError(f"conditional momentum undefined at node region x={x}")
    theta, c, b = _theta_sums(psi)
    kernel = np.exp(-1j * theta * g.x[j] / psi.hbar)
    num = np.sum(c * kernel) / (2.0 * np.pi * psi.hbar)
    den = np.sum(b * kernel) / (2.0 * np.pi * psi.hbar)
    _check_imag_residue(np.atleast_1d(num), np.atleast_1d(den))
    return float(num.real / den.real)


def conditional_momentum_derivative(psi: WaveFunction, x: float, eta: float = NODE_ETA) -> float:
    """Derivative-form Pbar(X) = hbar Im(psi* psi')(X) / rho(X), spectral psi'."""
    j = psi.grid.index_of(x)
    pf = polar_decompose(psi, eta)
    if pf.mask[j]:
        raise MaskedRegionError(f"conditional momentum undefined at node region x={x}")
    dpsi = spectral_derivative(psi)
    current = psi.hbar * float(np.imag(np.conj(psi.amplitudes[j]) * dpsi[j]))
    return current / float(pf.rho[j])


def conditional_momentum_derivative_profile(
    psi: WaveFunction, eta: float = NODE_ETA
) -> tuple[np.ndarray, np.ndarray]:
    pf = polar_decompose(psi, eta)
    dpsi = spectral_derivative(psi)
    current = psi.hbar * np.imag(np.conj(psi.amplitudes) * dpsi)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = current / pf.rho
    return np.where(pf.mask, 0.0, out), pf.mask


# ---------------------------------------------------------------------------
# five-way equivalence

ROUTES = ("integral", "derivative", "phase_gradient", "weak_real", "current_over_rho")


@dataclass(frozen=True)
class EquivalenceReport:
    """Worst pairwise deviation among the five momentum routes, off-mask."""

    max_deviation: float
    pairwise: dict
    tolerance: float
    n_points: int

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance

    def to_dict(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "pairwise": {f"{a}|{b}": v for (a, b), v in self.pairwise.items()},
            "tolerance": self.tolerance,
            "n_points": self.n_points,
            "passed": self.passed,
        }


def momentum_routes(psi: WaveFunction, eta: float = NODE_ETA) -> tuple[dict, np.ndarray]:
    """All five conditional-momentum profiles and the union mask."""
    integral, m1 = conditional_momentum_profile(psi, eta)
    derivative, m2 = conditional_momentum_derivative_profile(psi, eta)
    pf = polar_decompose(psi, eta)
    grad_s = bohm_momentum(pf)
    weak, m3 = weak_momentum_profile(psi, eta)
    dpsi = spectral_derivative(psi)
    t0j = psi.hbar * np.imag(np.conj(psi.amplitudes) * dpsi)
    with np.errstate(divide="ignore", invalid="ignore"):
        current_route = np.where(pf.mask, 0.0, t0j / pf.rho)
    mask = m1 | m2 | m3 | grad_s.mask
    routes = {
        "integral": integral,
        "derivative": derivative,
        "phase_gradient": grad_s.values,
        "weak_real": np.real(weak),
        "current_over_rho": current_route,
    }
    return routes, mask


def equivalence_report(
    psi: WaveFunction, tolerance: float = 1e-5, eta: float = NODE_ETA
) -> EquivalenceReport:
    routes, mask = momentum_routes(psi, eta)
    ok = ~mask
    if not ok.any():
        raise StateError("no off-mask points to compare")
    pairwise = {}
    worst = 0.0
    names = list(ROUTES)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            dev = float(np.max(np.abs(routes[a][ok] - routes[b][ok])))
            pairwise[(a, b)] = dev
            worst = max(worst, dev)
    return EquivalenceReport(worst, pairwise, tolerance, int(ok.sum()))
