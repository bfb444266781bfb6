"""Acceptance gate: one test per criterion, tolerances pinned, one line printed each.

Every criterion runs on the shipped catalog scenarios at their shipped
resolutions; nothing here is tuned at test time.
"""

import time

import numpy as np
import pytest

from oracles import free_gaussian_sigma, free_propagator_exact, gaussian_quantum_potential
from qflow.config import CATALOG_NAMES
from qflow.feynman import PathLattice, exhaustive_propagator, roughness_scan
from qflow.grids import make_grid
from qflow.polar import (
    continuity_residual,
    kinetic_trace_check,
    polar_decompose,
    qhj_residual,
    quantum_potential,
)
from qflow.schrodinger import evolve, free_potential, initial_state
from qflow.trajectories import integrate_ensemble, non_crossing_check, seed_ensemble
from qflow.weak_values import weak_flow_lines
from qflow.wigner import (
    equivalence_report,
    momentum_density_reference,
    momentum_routes,
    wigner_transform,
)


RESULT_LINES: list[str] = []


def _report(criterion: str, passed: bool, detail: str) -> None:
    line = f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} ({detail})"
    RESULT_LINES.append(line)
    print(line)


def test_criterion_1_five_way_equivalence(catalog_runs):
    """Max deviation among the five momentum routes < 1e-5 on every scenario."""
    t0 = time.time()
    tolerance = 1e-5
    worst_overall = 0.0
    for name in CATALOG_NAMES:
        cfg, series = catalog_runs(name)
        idx = np.unique(np.linspace(0, len(series) - 1, 6).astype(int))
        assert len(idx) >= 5, f"{name}: need at least 5 time slices"
        for i in idx:
            rep = equivalence_report(series.states[i], tolerance=tolerance, eta=cfg.eta)
            worst_overall = max(worst_overall, rep.max_deviation)
            assert rep.max_deviation < tolerance, (
                f"{name} t={series.times[i]:.3f}: {rep.max_deviation:.3e}"
            )
    elapsed = time.time() - t0
    _report("1 five-way equivalence", True, f"worst {worst_overall:.2e}, {elapsed:.1f}s")
    assert elapsed < 60.0


def test_criterion_2_free_gaussian_suite(catalog_runs):
    """Width law 0.1%; flow lines 0.5%; Q(0) within 1%."""
    t0 = time.time()
    cfg, series = catalog_runs("spreading_gaussian")
    grid = series.states[0].grid

    widths = []
    for i in np.linspace(0, len(series) - 1, 7).astype(int):
        rho = series.states[i].rho()
        widths.append(np.sqrt(np.sum(grid.x**2 * rho) * grid.dx))
    width_err = max(
        abs(w - free_gaussian_sigma(series.times[i])) / free_gaussian_sigma(series.times[i])
        for w, i in zip(widths, np.linspace(0, len(series) - 1, 7).astype(int))
    )
    assert width_err < 1e-3

    pf0 = polar_decompose(series.states[0], cfg.eta)
    seeds = seed_ensemble(pf0.field(pf0.rho), 50)
    ensemble = integrate_ensemble(series, seeds, cfg.eta)
    pos = ensemble.positions_matrix()
    expected = seeds[:, None] * free_gaussian_sigma(ensemble.times)[None, :] / free_gaussian_sigma(0.0)
    scale = np.maximum(np.abs(expected), 0.1)
    traj_err = np.max(np.abs(pos - expected) / scale)
    assert traj_err < 5e-3

    sigma = cfg["state.sigma"]
    q = quantum_potential(polar_decompose(series.states[0], cfg.eta))
    q0 = q.values[grid.index_of(0.0)]
    q_err = abs(q0 - gaussian_quantum_potential(0.0, sigma)) / gaussian_quantum_potential(0.0, sigma)
    assert q_err < 1e-2

    elapsed = time.time() - t0
    _report(
        "2 free-Gaussian suite",
        True,
        f"width {width_err:.1e}, trajectories {traj_err:.1e}, Q(0) {q_err:.1e}, {elapsed:.1f}s",
    )
    assert elapsed < 10.0


def test_criterion_3_equation_residuals(catalog_runs):
    """Residuals < 1e-3 at catalog resolution; order in [1.7, 2.3] after doubling."""
    t0 = time.time()
    cfg, series = catalog_runs("spreading_gaussian")
    pot = cfg.build_potential()
    cont_coarse = continuity_residual(series, cfg.eta)
    qhj_coarse = qhj_residual(series, pot, cfg.eta)
    assert cont_coarse < 1e-3
    assert qhj_coarse < 1e-3

    fine_grid = make_grid(cfg["grid.x_min"], cfg["grid.x_max"], 2 * cfg["grid.n"])
    fine_series = evolve(
        initial_state(fine_grid, "gaussian", sigma=cfg["state.sigma"]),
        free_potential(),
        cfg["evolve.t_final"],
        cfg["evolve.dt"] / 2,
    )
    cont_order = np.log2(cont_coarse / continuity_residual(fine_series, cfg.eta))
    qhj_order = np.log2(qhj_coarse / qhj_residual(fine_series, pot, cfg.eta))
    assert 1.7 < cont_order < 2.3
    assert 1.7 < qhj_order < 2.3

    elapsed = time.time() - t0
    _report(
        "3 equation residuals",
        True,
        f"continuity {cont_coarse:.1e} (order {cont_order:.2f}), "
        f"QHJ {qhj_coarse:.1e} (order {qhj_order:.2f}), {elapsed:.1f}s",
    )
    assert elapsed < 30.0


def test_criterion_4_trace_identity(catalog_runs):
    """Integrated KE_B + KE_O + V matches the spectral energy within 0.5%."""
    worst = 0.0
    for name in CATALOG_NAMES:
        cfg, series = catalog_runs(name)
        pot = cfg.build_potential()
        for i in np.unique(np.linspace(0, len(series) - 1, 4).astype(int)):
            state = series.states[i]
            check = kinetic_trace_check(polar_decompose(state, cfg.eta), pot, state)
            worst = max(worst, check.relative_deviation)
            assert check.relative_deviation < 5e-3, f"{name} t={series.times[i]:.3f}"
    _report("4 trace identity", True, f"worst relative deviation {worst:.2e}")


def test_criterion_5_path_sum_propagator():
    """Exhaustive two-slice sum and semigroup composition within 1% of analytic."""
    t0 = time.time()
    grid = make_grid(-70, 70, 8192)
    lattice = PathLattice(grid, 2, 1.0)
    x_start, x_end = -1.0, 1.5
    exact = free_propagator_exact(x_end, x_start, lattice.total_time)
    lattice_value = exhaustive_propagator(x_start, x_end, lattice)
    mod_err = abs(abs(lattice_value) / abs(exact) - 1.0)
    phase_err = abs(np.angle(lattice_value / exact))
    assert mod_err < 1e-2
    assert phase_err < 1e-2

    half = free_propagator_exact(grid.x, x_start, 1.0) * free_propagator_exact(
        x_end, grid.x, 1.0
    )
    composed = np.sum(half) * grid.dx
    comp_mod_err = abs(abs(composed) / abs(exact) - 1.0)
    comp_phase_err = abs(np.angle(composed / exact))
    assert comp_mod_err < 1e-2
    assert comp_phase_err < 1e-2

    elapsed = time.time() - t0
    _report(
        "5 path-sum propagator",
        True,
        f"modulus {mod_err:.1e}, phase {phase_err:.1e}, "
        f"composition {comp_mod_err:.1e}/{comp_phase_err:.1e}, {elapsed:.1f}s",
    )
    assert elapsed < 30.0


def test_criterion_6_two_slit_properties(two_slit_run):
    """No crossings over 50 seeds; mirror pairs; weak lines retrace Bohm lines."""
    cfg, series = two_slit_run
    pf0 = polar_decompose(series.states[0], cfg.eta)
    seeds = seed_ensemble(pf0.field(pf0.rho), 50)
    bohm = integrate_ensemble(series, seeds, cfg.eta)
    crossing = non_crossing_check(bohm)
    assert crossing.ok

    pos_seeds = seeds[seeds > 0]
    mirrored = integrate_ensemble(series, np.concatenate([pos_seeds, -pos_seeds]), cfg.eta)
    mp = mirrored.positions_matrix()
    half = len(pos_seeds)
    mirror_dev = float(np.max(np.abs(mp[:half] + mp[half:])))
    assert mirror_dev < 1e-6

    weak = weak_flow_lines(series, seeds, cfg.eta)
    weak_dev = float(np.max(np.abs(weak.positions_matrix() - bohm.positions_matrix())))
    assert weak_dev < 1e-6

    _report(
        "6 two-slit properties",
        True,
        f"crossings none, mirror {mirror_dev:.1e}, weak-vs-Bohm {weak_dev:.1e}",
    )


def test_criterion_7_wigner_marginals_and_boost(catalog_runs):
    """Marginals within 1e-6; momentum-mode boost shifts every route by hbar k_b."""
    worst_marginal = 0.0
    for name in ("static_gaussian", "spreading_gaussian", "harmonic_ground", "two_slit"):
        cfg, series = catalog_runs(name)
        state = series.states[-1]
        w = wigner_transform(state, cfg.eta)
        pos_dev = float(np.max(np.abs(w.position_marginal() - state.rho())))
        mom_dev = float(
            np.max(np.abs(w.momentum_marginal() - momentum_density_reference(state, w.p)))
        )
        worst_marginal = max(worst_marginal, pos_dev, mom_dev)
        assert pos_dev < 1e-6 and mom_dev < 1e-6, name
    # plane wave: all momentum mass in the k0 bin
    cfg, series = catalog_runs("plane_wave")
    state = series.states[-1]
    w = wigner_transform(state, cfg.eta)
    marginal = w.momentum_marginal()
    peak = np.argmax(marginal)
    assert w.p[peak] == pytest.approx(cfg["state.k0"], abs=1e-12)
    assert marginal[peak] * w.dp == pytest.approx(1.0, abs=1e-6)

    cfg, series = catalog_runs("spreading_gaussian")
    state = series.states[len(series) // 2]
    grid = state.grid
    kb = 2 * np.pi * 3 / grid.length
    boosted = state.with_amplitudes(state.amplitudes * np.exp(1j * kb * grid.x))
    base, m0 = momentum_routes(state, cfg.eta)
    shifted, m1 = momentum_routes(boosted, cfg.eta)
    ok = ~(m0 | m1)
    boost_dev = max(
        float(np.max(np.abs(shifted[name][ok] - base[name][ok] - kb))) for name in base
    )
    assert boost_dev < 1e-7

    _report(
        "7 Wigner marginals and boost",
        True,
        f"marginals {worst_marginal:.1e}, boost {boost_dev:.1e}",
    )


def test_criterion_8_path_roughness_exponent():
    """Mean |p_X| grows as eps^-1/2 over a decade: exponent in [0.4, 0.6]."""
    exponent, _ = roughness_scan(np.logspace(-1, -2, 5), n_paths=4000, n_slices=16, seed=7)
    assert 0.4 < exponent < 0.6
    _report("8 path roughness", True, f"exponent {exponent:.3f}")
