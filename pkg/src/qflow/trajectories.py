"""Flow-line integration through grid velocity fields.

The lines integrated here are streamlines of the mean momentum flow: the
velocity at a point is the local ensemble-average momentum divided by the
mass, so a line is the track of the average flux, not the record of one
particle's motion. Seeding initial positions at density quantiles makes
the line density track rho and keeps it tracking rho at later times
(equivariance).

Velocity values are undefined at wavefunction nodes; integration refuses
to extrapolate through a masked region and aborts with a diagnostic
instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaskedRegionError, StateError, TrajectoryError
from .grids import Grid1D
from .polar import FieldOnGrid, bohm_momentum, polar_series
from .schrodinger import EvolutionSeries


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        x = np.asarray(self.positions, dtype=np.float64)
        if t.shape != x.shape:
            raise StateError("trajectory times/positions length mismatch")
        if not np.all(np.isfinite(x)):
            raise StateError("trajectory contains non-finite positions")
        if len(t) >= 2:
            steps = np.diff(t)
            if not np.all(steps > 0):
                raise StateError("trajectory times must be strictly increasing")
            if np.max(steps) - np.min(steps) > 1e-9 * np.max(steps):
                raise StateError("trajectory times must be uniformly spaced")
        t.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", x)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    times: np.ndarray
    trajectories: list
    seeds: np.ndarray

    def __post_init__(self):
        for tr in self.trajectories:
            if not np.array_equal(tr.times, self.times):
                raise StateError("ensemble trajectories must share one time axis")

    def __len__(self) -> int:
        return len(self.trajectories)

    def positions_matrix(self) -> np.ndarray:
        """(n_trajectories, n_times) position array."""
        return np.stack([tr.positions for tr in self.trajectories])


@dataclass(frozen=True)
class NonCrossingReport:
    ok: bool
    first_violation_step: int | None = None
    first_violation_time: float | None = None
    pair: tuple[int, int] | None = None
    min_gap: float = np.inf

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "first_violation_step": self.first_violation_step,
            "first_violation_time": self.first_violation_time,
            "pair": list(self.pair) if self.pair else None,
            "min_gap": None if np.isinf(self.min_gap) else self.min_gap,
        }


class VelocityField:
    """Velocity samples on (time slice, grid point) with bilinear interpolation.

    Queries interpolate linearly in x between grid points and linearly in t
    between slices; touching any masked sample raises MaskedRegionError.
    """

    def __init__(self, grid: Grid1D, times: np.ndarray, values: np.ndarray, masks: np.ndarray):
        self.grid = grid
        self.times = np.asarray(times, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        self.masks = np.asarray(masks, dtype=bool)
        if self.values.shape != (len(self.times), grid.n):
            raise StateError("velocity field shape mismatch")
        self.dt = float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @classmethod
    def from_series(cls, series: EvolutionSeries, eta: float | None = None) -> "VelocityField":
        """Bohm velocity dS/dx / m sampled on every stored slice."""
        kwargs = {} if eta is None else {"eta": eta}
        polars = polar_series(series, **kwargs)
        vals = np.empty((len(polars), series.states[0].grid.n))
        masks = np.empty_like(vals, dtype=bool)
        for i, pf in enumerate(polars):
            field = bohm_momentum(pf)
            vals[i] = field.values / pf.mass
            masks[i] = field.mask
        return cls(series.states[0].grid, series.times, vals, masks)

    def _space_interp(self, slice_idx: int, x: np.ndarray) -> np.ndarray:
        g = self.grid
        pos = (x - g.x_min) / g.dx
        j = np.floor(pos).astype(int)
        out_of_grid = (j < 0) | (j >= g.n - 1)
        if np.any(out_of_grid):
            idx = int(np.where(out_of_grid)[0][0])
            err = TrajectoryError(
                f"position {x[idx]:.6g} left the grid", position=float(x[idx]), seed_index=idx
            )
            raise err
        frac = pos - j
        vals = self.values[slice_idx]
        mask = self.masks[slice_idx]
        hit = mask[j] | mask[j + 1]
        if np.any(hit):
            idx = int(np.where(hit)[0][0])
            err = MaskedRegionError(
                f"velocity queried inside a masked node region near x={x[idx]:.6g} "
                f"(t={self.times[slice_idx]:.6g})"
            )
            err.seed_index = idx
            raise err
        return vals[j] * (1.0 - frac) + vals[j + 1] * frac

    def at(self, x: np.ndarray, t: float) -> np.ndarray:
        """Bilinear velocity at positions x and time t (vectorized over x)."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if len(self.times) == 1:
            return self._space_interp(0, x)
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise StateError(f"time {t} outside the series span")
        pos = (t - self.times[0]) / self.dt
        i = int(np.clip(np.floor(pos), 0, len(self.times) - 2))
        w = pos - i
        lo = self._space_interp(i, x)
        hi = self._space_interp(i + 1, x)
        return lo * (1.0 - w) + hi * w

    def integrate(self, seeds: np.ndarray) -> TrajectoryEnsemble:
        """Classic RK4 through the interpolated field with the series spacing.

        Substep velocities interpolate linearly in time between stored
        slices rather than re-solving the dynamics at substep times.
        """
        seeds = np.atleast_1d(np.asarray(seeds, dtype=np.float64))
        nt = len(self.times)
        out = np.empty((len(seeds), nt))
        out[:, 0] = seeds
        x = seeds.copy()
        h = self.dt
        for i in range(nt - 1):
            t = self.times[i]
            try:
                k1 = self.at(x, t)
                k2 = self.at(x + 0.5 * h * k1, t + 0.5 * h)
                k3 = self.at(x + 0.5 * h * k2, t + 0.5 * h)
                k4 = self.at(x + h * k3, t + h)
            except (MaskedRegionError, TrajectoryError) as exc:
                seed_idx = getattr(exc, "seed_index", None)
                seed_txt = "" if seed_idx is None else f" (seed {seed_idx}, x0={seeds[seed_idx]:.6g})"
                raise TrajectoryError(
                    f"integration failed at t={t:.6g}{seed_txt}: {exc}",
                    time=float(t),
                    seed_index=seed_idx,
                ) from exc
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            out[:, i + 1] = x
        trajs = [Trajectory(self.times, out[i]) for i in range(len(seeds))]
        return TrajectoryEnsemble(self.times, trajs, seeds)


def seed_ensemble(rho0: FieldOnGrid, count: int) -> np.ndarray:
    """Initial positions at the (i+0.5)/count quantiles of the rho0 distribution."""
    if count < 2:
        raise StateError("seed_ensemble needs count >= 2")
    g = rho0.grid
    rho = np.clip(rho0.values, 0.0, None)
    edges = np.concatenate([[g.x_min], g.x_min + g.dx * (np.arange(g.n) + 1.0)])
    cdf = np.concatenate([[0.0], np.cumsum(rho * g.dx)])
    if cdf[-1] <= 0:
        raise StateError("cannot seed from an identically-zero density")
    cdf /= cdf[-1]
    q = (np.arange(count) + 0.5) / count
    return np.interp(q, cdf, edges)


def velocity_at(series: EvolutionSeries, x: float, t: float, eta: float | None = None) -> float:
    """Interpolated Bohm velocity dS/dx / m at (x, t)."""
    field = VelocityField.from_series(series, eta)
    return float(field.at(np.array([x]), t)[0])


def integrate_trajectory(series: EvolutionSeries, x0: float, eta: float | None = None) -> Trajectory:
    """Integrate one flow line from x0 through the series' Bohm velocity field."""
    field = VelocityField.from_series(series, eta)
    return field.integrate(np.array([x0])).trajectories[0]


def integrate_ensemble(
    series: EvolutionSeries, seeds: np.ndarray, eta: float | None = None
) -> TrajectoryEnsemble:
    field = VelocityField.from_series(series, eta)
    return field.integrate(seeds)


def non_crossing_check(ensemble: TrajectoryEnsemble, tol: float = 1e-12) -> NonCrossingReport:
    """Verify the position ordering of trajectories is the same at every step."""
    if len(ensemble) < 2:
        raise StateError("non-crossing check needs at least 2 trajectories")
    pos = ensemble.positions_matrix()
    order = np.argsort(pos[:, 0], kind="stable")
    sorted_pos = pos[order]
    gaps = np.diff(sorted_pos, axis=0)
    min_gap = float(np.min(gaps))
    bad = gaps < -tol
    if not bad.any():
        return NonCrossingReport(ok=True, min_gap=min_gap)
    steps = np.where(bad.any(axis=0))[0]
    step = int(steps[0])
    row = int(np.where(bad[:, step])[0][0])
    pair = (int(order[row]), int(order[row + 1]))
    return NonCrossingReport(
        ok=False,
        first_violation_step=step,
        first_violation_time=float(ensemble.times[step]),
        pair=pair,
        min_gap=min_gap,
    )
