"""Scenario orchestration: each CLI subcommand maps to a run_* function here.

Every produced file starts with a '#'-prefixed header block recording the
config hash, units, grid, and tolerances, followed by a plain CSV table;
structured reports are JSON. Output is deterministic: identical config and
seed give byte-identical files (floats are serialized with shortest
round-trip repr, no timestamps anywhere).
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .config import CATALOG_NAMES, ScenarioConfig, load_catalog_config
from .errors import QFlowError
from .feynman import (
    PathLattice,
    exhaustive_propagator,
    free_propagator,
    monte_carlo_propagator,
    roughness_scan,
    sample_kernel_paths,
)
from .polar import (
    bohm_momentum,
    energy_momentum_components,
    kinetic_trace_check,
    osmotic_momentum,
    polar_series,
    quantum_potential,
)
from .schrodinger import EvolutionSeries, total_energy
from .trajectories import integrate_ensemble, non_crossing_check, seed_ensemble
from .weak_values import weak_flow_lines, weak_momentum_profile
from .wigner import (
    conditional_momentum_derivative_profile,
    conditional_momentum_profile,
    equivalence_report,
    momentum_density_reference,
    wigner_transform,
)

SUBCOMMANDS = ("evolve", "fields", "trajectories", "weak", "wigner", "paths", "verify")


@dataclass
class RunResult:
    subcommand: str
    exit_code: int
    status: str
    summary: dict
    files: list = field(default_factory=list)  # (name, content) pairs


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _header(config: ScenarioConfig, subcommand: str) -> str:
    grid = config.build_grid()
    pot = config.build_potential()
    lines = [
        "# qflow output",
        f"# subcommand: {subcommand}",
        f"# scenario: {config.name or 'unnamed'}",
        f"# config_hash: {config.config_hash}",
        f"# units: hbar={_fmt(config.hbar)} mass={_fmt(config.mass)}",
        f"# grid: x_min={_fmt(grid.x_min)} x_max={_fmt(grid.x_max)} n={grid.n} dx={_fmt(grid.dx)}",
        (
            "# tolerances: "
            f"node_eta={_fmt(config.eta)} scale={_fmt(config['tolerances.scale'])} "
            f"equivalence={_fmt(config['tolerances.equivalence'])}"
        ),
        f"# seed: {config.seed}",
    ]
    ramp = pot.ramp_width(grid)
    if ramp is not None:
        lines.append(f"# ramp_width: {_fmt(ramp)}")
    return "\n".join(lines) + "\n"


def _csv(config: ScenarioConfig, subcommand: str, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(_header(config, subcommand))
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _json_report(config: ScenarioConfig, subcommand: str, payload: dict, scenario: str | None = None) -> str:
    doc = {
        "subcommand": subcommand,
        "scenario": scenario or config.name or "unnamed",
        "config_hash": config.config_hash,
        "units": {"hbar": config.hbar, "mass": config.mass},
        "tolerances": {
            "node_eta": config.eta,
            "scale": config["tolerances.scale"],
            "equivalence": config["tolerances.equivalence"],
        },
        "seed": config.seed,
    }
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _slice_indices(count: int, wanted: int) -> np.ndarray:
    return np.unique(np.linspace(0, count - 1, min(wanted, count)).astype(int))


def _equivariance_distance(series: EvolutionSeries, positions: np.ndarray, eta: float) -> float:
    """Kolmogorov distance between final trajectory positions and rho(., t_final)."""
    grid = series.states[0].grid
    rho = series.states[-1].rho()
    cdf = np.concatenate([[0.0], np.cumsum(rho * grid.dx)])
    cdf /= cdf[-1]
    edges = np.concatenate([[grid.x_min], grid.x_min + grid.dx * (np.arange(grid.n) + 1.0)])
    final = np.sort(positions[:, -1])
    n = len(final)
    f = np.interp(final, edges, cdf)
    hi = (np.arange(n) + 1.0) / n
    lo = np.arange(n) / n
    return float(max(np.max(np.abs(f - hi)), np.max(np.abs(f - lo))))


# ---------------------------------------------------------------------------
# subcommands


def run_evolve(config: ScenarioConfig) -> RunResult:
    series = config.run_evolution()
    pot = config.build_potential()
    e0 = total_energy(series.states[0], pot)
    files = []
    diag_rows = []
    for t, state in zip(series.times, series.states):
        diag_rows.append((t, state.norm_squared(), total_energy(state, pot)))
    files.append(("diagnostics.csv", _csv(config, "evolve", ["t", "norm", "energy"], diag_rows)))
    idx = _slice_indices(len(series), config["output.states"])
    grid = series.states[0].grid
    for i in idx:
        state = series.states[i]
        rows = zip(grid.x, state.amplitudes.real, state.amplitudes.imag)
        files.append(
            (f"state_{i:04d}.csv", _csv(config, "evolve", ["x", "re", "im"], rows))
        )
    energies = np.array([r[2] for r in diag_rows])
    norms = np.array([r[1] for r in diag_rows])
    summary = {
        "slices": len(series),
        "dt": series.dt,
        "energy_drift": float(np.max(np.abs(energies - e0)) / max(abs(e0), 1e-300)),
        "norm_drift": float(np.max(np.abs(norms - 1.0))),
        "exported_states": [int(i) for i in idx],
    }
    return RunResult("evolve", 0, "ok", summary, files)


def run_fields(config: ScenarioConfig) -> RunResult:
    series = config.run_evolution()
    pot = config.build_potential()
    polars = polar_series(series, config.eta)
    idx = _slice_indices(len(series), config["output.slices"])
    grid = series.states[0].grid
    files = []
    trace = {}
    for i in idx:
        pf = polars[i]
        named = {
            "R": pf.field(pf.R, "R"),
            "S": pf.field(pf.S, "S"),
            "grad_S": bohm_momentum(pf),
            "Q": quantum_potential(pf),
            "osmotic": osmotic_momentum(pf),
        }
        t00, t0j = None, None
        if 0 < i < len(series) - 1:
            t00, t0j = energy_momentum_components(series.states[i], series, config.eta)
            named["T0j"] = t0j
            named["T00"] = t00
        for name, fld in named.items():
            rows = zip(grid.x, fld.values, fld.mask)
            files.append(
                (
                    f"{name}_{i:04d}.csv",
                    _csv(config, "fields", ["x", "value", "masked"], rows),
                )
            )
        check = kinetic_trace_check(pf, pot, series.states[i])
        trace[f"t={series.times[i]:.6g}"] = {
            "integral_energy": check.integral_energy,
            "reference_energy": check.reference_energy,
            "relative_deviation": check.relative_deviation,
        }
    summary = {"exported_slices": [int(i) for i in idx], "trace_check": trace}
    return RunResult("fields", 0, "ok", summary, files)


def run_trajectories(config: ScenarioConfig) -> RunResult:
    series = config.run_evolution()
    polars = polar_series(series, config.eta)
    rho0 = polars[0].field(polars[0].rho, "rho")
    seeds = seed_ensemble(rho0, config["trajectories.count"])
    ensemble = integrate_ensemble(series, seeds, config.eta)
    report = non_crossing_check(ensemble)
    pos = ensemble.positions_matrix()
    rows = []
    for tid in range(len(ensemble)):
        for t, x in zip(ensemble.times, pos[tid]):
            rows.append((tid, t, x))
    files = [
        ("trajectories.csv", _csv(config, "trajectories", ["trajectory_id", "t", "x"], rows)),
        (
            "non_crossing.json",
            _json_report(config, "trajectories", {"non_crossing": report.to_dict()}),
        ),
    ]
    summary = {
        "count": len(ensemble),
        "non_crossing": report.ok,
        "min_gap": None if np.isinf(report.min_gap) else report.min_gap,
        "equivariance_distance": _equivariance_distance(series, pos, config.eta),
    }
    return RunResult("trajectories", 0, "ok", summary, files)


def run_weak(config: ScenarioConfig) -> RunResult:
    series = config.run_evolution()
    idx = _slice_indices(len(series), config["output.slices"])
    grid = series.states[0].grid
    files = []
    for i in idx:
        state = series.states[i]
        values, mask = weak_momentum_profile(state, config.eta)
        overlap = np.abs(state.amplitudes)
        rows = zip(grid.x, values.real, values.imag, overlap, mask)
        files.append(
            (
                f"weak_momentum_{i:04d}.csv",
                _csv(config, "weak", ["x", "re", "im", "overlap_magnitude", "masked"], rows),
            )
        )
    polars = polar_series(series, config.eta)
    seeds = seed_ensemble(polars[0].field(polars[0].rho, "rho"), config["trajectories.count"])
    weak_ens = weak_flow_lines(series, seeds, config.eta)
    bohm_ens = integrate_ensemble(series, seeds, config.eta)
    deviation = float(
        np.max(np.abs(weak_ens.positions_matrix() - bohm_ens.positions_matrix()))
    )
    rows = []
    wpos = weak_ens.positions_matrix()
    for tid in range(len(weak_ens)):
        for t, x in zip(weak_ens.times, wpos[tid]):
            rows.append((tid, t, x))
    files.append(
        ("weak_flow_lines.csv", _csv(config, "weak", ["trajectory_id", "t", "x"], rows))
    )
    summary = {
        "exported_slices": [int(i) for i in idx],
        "flow_line_max_deviation_from_bohm": deviation,
        "seeds": len(seeds),
    }
    return RunResult("weak", 0, "ok", summary, files)


def run_wigner(config: ScenarioConfig) -> RunResult:
    series = config.run_evolution()
    grid = series.states[0].grid
    idx = _slice_indices(len(series), config["output.slices"])
    files = []
    marginals = {}
    polars = polar_series(series, config.eta)
    for i in idx:
        state = series.states[i]
        integral, m1 = conditional_momentum_profile(state, config.eta)
        derivative, m2 = conditional_momentum_derivative_profile(state, config.eta)
        grad_s = bohm_momentum(polars[i])
        mask = m1 | m2 | grad_s.mask
        rows = zip(grid.x, integral, derivative, grad_s.values, mask)
        files.append(
            (
                f"conditional_momentum_{i:04d}.csv",
                _csv(
                    config,
                    "wigner",
                    ["x", "integral", "derivative", "phase_gradient", "masked"],
                    rows,
                ),
            )
        )
    final = series.states[-1]
    w = wigner_transform(final, config.eta)
    x_stride = config["wigner.x_stride"] or max(1, grid.n // 256)
    p_stride = config["wigner.p_stride"] or max(1, grid.n // 256)
    rows = []
    for xi in range(0, grid.n, x_stride):
        for pi in range(0, grid.n, p_stride):
            rows.append((w.x[xi], w.p[pi], w.values[xi, pi]))
    files.append(("wigner.csv", _csv(config, "wigner", ["x", "p", "w"], rows)))
    pos_dev = float(np.max(np.abs(w.position_marginal() - final.rho())))
    mom_dev = float(
        np.max(np.abs(w.momentum_marginal() - momentum_density_reference(final, w.p)))
    )
    moment = w.conditional_moment()
    current = final.hbar * np.imag(
        np.conj(final.amplitudes)
        * np.fft.ifft(1j * grid.wavenumbers() * np.fft.fft(final.amplitudes))
    )
    moment_dev = float(np.max(np.abs(moment - current)))
    marginals["final_slice"] = {
        "position_marginal_max_dev": pos_dev,
        "momentum_marginal_max_dev": mom_dev,
        "first_moment_max_dev": moment_dev,
    }
    summary = {
        "exported_slices": [int(i) for i in idx],
        "wigner_strides": {"x": x_stride, "p": p_stride},
        "marginals": marginals,
    }
    return RunResult("wigner", 0, "ok", summary, files)


def run_paths(config: ScenarioConfig) -> RunResult:
    grid = config.build_grid()
    eps = config["paths.epsilon"]
    n_slices = config["paths.n_slices"]
    lattice = PathLattice(grid, n_slices, eps, config.mass, config.hbar)
    x_start = config["paths.x_start"]
    x_end = config["paths.x_end"]
    seed = config.seed

    exact = free_propagator(x_end, x_start, lattice.total_time, config.mass, config.hbar)
    exhaustive = exhaustive_propagator(x_start, x_end, lattice)
    mc = monte_carlo_propagator(x_start, x_end, lattice, config["paths.mc_samples"], seed)

    # semigroup: quadrature composition of two half-time analytic kernels
    half_t = lattice.total_time / 2.0
    k1 = np.array([free_propagator(y, x_start, half_t, config.mass, config.hbar) for y in grid.x])
    k2 = np.array([free_propagator(x_end, y, half_t, config.mass, config.hbar) for y in grid.x])
    composed = complex(np.sum(k1 * k2) * grid.dx)

    prop_rows = [
        (n_slices, grid.n, eps, exhaustive.real, exhaustive.imag, exact.real, exact.imag)
    ]
    files = [
        (
            "propagator_comparison.csv",
            _csv(
                config,
                "paths",
                ["n_slices", "n", "epsilon", "re", "im", "analytic_re", "analytic_im"],
                prop_rows,
            ),
        )
    ]

    dump = sample_kernel_paths(lattice, x_start, 12, seed=seed)
    rows = []
    kink_rows = []
    for pid in range(dump.shape[0]):
        for s in range(dump.shape[1]):
            rows.append((pid, s, dump[pid, s]))
        backward = config.mass * np.diff(dump[pid])[:-1] / eps
        forward = config.mass * np.diff(dump[pid])[1:] / eps
        for s, (b, f) in enumerate(zip(backward, forward), start=1):
            kink_rows.append((pid, s, b, f, b - f))
    files.append(("paths.csv", _csv(config, "paths", ["path_id", "slice", "x"], rows)))
    files.append(
        (
            "kink_momenta.csv",
            _csv(
                config,
                "paths",
                ["path_id", "slice", "backward", "forward", "p_x"],
                kink_rows,
            ),
        )
    )

    epsilons = np.logspace(np.log10(eps / 10.0), np.log10(eps / 100.0), 5)
    exponent, table = roughness_scan(
        epsilons,
        n_paths=config["paths.roughness_paths"],
        n_slices=config["paths.roughness_slices"],
        seed=seed,
        mass=config.mass,
        hbar=config.hbar,
    )
    files.append(
        ("roughness.csv", _csv(config, "paths", ["epsilon", "mean_abs_p_x"], table))
    )

    summary = {
        "exhaustive": {"re": exhaustive.real, "im": exhaustive.imag},
        "analytic": {"re": exact.real, "im": exact.imag},
        "modulus_ratio_error": abs(exhaustive) / abs(exact) - 1.0,
        "phase_error": float(np.angle(exhaustive / exact)),
        "composition_modulus_ratio_error": abs(composed) / abs(exact) - 1.0,
        "composition_phase_error": float(np.angle(composed / exact)),
        "monte_carlo": {
            "re": mc.value.real,
            "im": mc.value.imag,
            "stderr": mc.stderr,
            "samples": mc.samples,
            "sigma_distance": abs(mc.value - exhaustive) / mc.stderr if mc.stderr else 0.0,
        },
        "roughness_exponent": exponent,
    }
    files.append(("paths_report.json", _json_report(config, "paths", {"results": summary})))
    return RunResult("paths", 0, "ok", summary, files)


def run_verify(config: ScenarioConfig | None) -> RunResult:
    """Five-way equivalence gate, for one scenario or the whole catalog."""
    if config is not None:
        jobs = [(config.name or "unnamed", config)]
        header_cfg = config
    else:
        jobs = [(name, load_catalog_config(name)) for name in CATALOG_NAMES]
        header_cfg = jobs[0][1]
    report = {}
    all_pass = True
    t_start = time.time()
    for name, cfg in jobs:
        series = cfg.run_evolution()
        tol = cfg["tolerances.equivalence"] * cfg["tolerances.scale"]
        idx = _slice_indices(len(series), max(cfg["output.slices"], 5))
        slices = []
        worst = 0.0
        for i in idx:
            rep = equivalence_report(series.states[i], tolerance=tol, eta=cfg.eta)
            worst = max(worst, rep.max_deviation)
            slices.append(
                {
                    "t": float(series.times[i]),
                    "max_deviation": rep.max_deviation,
                    "n_points": rep.n_points,
                    "passed": rep.passed,
                }
            )
        passed = worst < tol
        all_pass &= passed
        report[name] = {
            "passed": passed,
            "tolerance": tol,
            "worst_deviation": worst,
            "slices": slices,
        }
    elapsed = time.time() - t_start
    summary = {
        "scenarios": {k: {"passed": v["passed"], "worst_deviation": v["worst_deviation"]} for k, v in report.items()},
        "all_passed": all_pass,
        "elapsed_seconds": round(elapsed, 3),
    }
    files = [
        (
            "verify_report.json",
            _json_report(
                header_cfg,
                "verify",
                {"scenarios": report, "all_passed": all_pass},
                scenario=None if config is not None else "catalog",
            ),
        )
    ]
    if all_pass:
        return RunResult("verify", 0, "ok", summary, files)
    return RunResult("verify", 1, "verification_failed", summary, files)


def run_subcommand(name: str, config: ScenarioConfig | None) -> RunResult:
    """Dispatch a subcommand; QFlowError subclasses propagate to the caller."""
    if name not in SUBCOMMANDS:
        raise QFlowError(f"unknown subcommand '{name}'")
    if name == "verify":
        return run_verify(config)
    if config is None:
        raise QFlowError(f"subcommand '{name}' requires a scenario config")
    runner = {
        "evolve": run_evolve,
        "fields": run_fields,
        "trajectories": run_trajectories,
        "weak": run_weak,
        "wigner": run_wigner,
        "paths": run_paths,
    }[name]
    return runner(config)
