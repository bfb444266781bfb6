import numpy as np
import pytest

from oracles import free_gaussian_sigma, harmonic_coherent_state
from qflow.errors import ConfigError, StateError
from qflow.grids import make_grid, momentum_expectation, position_expectation
from qflow.schrodinger import (
    evolve,
    evolve_step,
    free_potential,
    harmonic_potential,
    initial_state,
    square_barrier,
    square_well,
    stability_bound,
    total_energy,
    two_gaussian_slit,
)


def test_initial_gaussian_moments():
    g = make_grid(-10, 10, 256)
    psi = initial_state(g, "gaussian", x0=0.0, sigma=1.0, k0=0.0)
    assert abs(position_expectation(psi)) < g.dx
    assert abs(momentum_expectation(psi)) < g.dp()


def test_initial_gaussian_momentum_kick():
    g = make_grid(-10, 10, 256)
    psi = initial_state(g, "gaussian", x0=0.0, sigma=1.0, k0=2.0)
    assert momentum_expectation(psi) == pytest.approx(2.0, abs=g.dp())


def test_two_gaussian_maxima():
    g = make_grid(-10, 10, 256)
    psi = initial_state(g, "two_gaussian", x0=0.0, sigma=0.5, separation=4.0)
    rho = psi.rho()
    half = g.n // 2
    left = g.x[np.argmax(rho[:half])]
    right = g.x[half + np.argmax(rho[half:])]
    assert left == pytest.approx(-2.0, abs=g.dx)
    assert right == pytest.approx(2.0, abs=g.dx)
    assert rho.max() == pytest.approx(rho[np.argmax(rho[:half])], rel=1e-9)


def test_packet_too_wide_raises():
    g = make_grid(-10, 10, 128)
    with pytest.raises(StateError):
        initial_state(g, "gaussian", sigma=8.0)


def test_plane_wave_must_be_commensurate():
    g = make_grid(-10, 10, 128)
    with pytest.raises(StateError):
        initial_state(g, "plane_wave", k0=1.0)


def test_free_plane_wave_step_is_pure_phase():
    g = make_grid(-16, 16, 256)
    k0 = 2 * np.pi * 8 / g.length
    psi = initial_state(g, "plane_wave", k0=k0)
    dt = 0.02
    stepped = evolve_step(psi, free_potential(), dt)
    expected = np.exp(-1j * k0**2 * dt / 2.0) * psi.amplitudes
    assert np.max(np.abs(stepped.amplitudes - expected)) < 1e-12
    assert np.max(np.abs(np.abs(stepped.amplitudes) - np.abs(psi.amplitudes))) < 1e-12


def test_spreading_width_law():
    g = make_grid(-20, 20, 512)
    psi = initial_state(g, "gaussian", sigma=1.0)
    series = evolve(psi, free_potential(), 1.0, 0.005)
    rho = series.states[-1].rho()
    width = np.sqrt(np.sum(g.x**2 * rho) * g.dx)
    assert width == pytest.approx(free_gaussian_sigma(1.0), rel=1e-3)


def test_harmonic_ground_state_period_return():
    g = make_grid(-12, 12, 512)
    psi = initial_state(g, "gaussian", sigma=np.sqrt(0.5))
    period = 2 * np.pi
    series = evolve(psi, harmonic_potential(1.0), period, period / 2048, store_every=2048)
    assert np.max(np.abs(series.states[-1].rho() - psi.rho())) < 1e-6


def test_evolve_requires_integer_step_count():
    g = make_grid(-10, 10, 64)
    psi = initial_state(g, "gaussian", sigma=1.0)
    with pytest.raises(StateError):
        evolve(psi, free_potential(), 1.0, 0.3)


def test_evolve_step_respects_stability_bound():
    g = make_grid(-10, 10, 64)
    psi = initial_state(g, "gaussian", sigma=1.0)
    with pytest.raises(StateError):
        evolve_step(psi, free_potential(), 0.5, dt_max=0.1)
    bound = stability_bound(psi, harmonic_potential(1.0))
    assert bound > 0


def test_total_energy_plane_wave():
    g = make_grid(-16, 16, 256)
    k0 = 2 * np.pi * 8 / g.length
    psi = initial_state(g, "plane_wave", k0=k0)
    assert total_energy(psi, free_potential()) == pytest.approx(k0**2 / 2, rel=1e-8)


def test_total_energy_gaussian():
    g = make_grid(-16, 16, 512)
    sigma = 1.2
    psi = initial_state(g, "gaussian", sigma=sigma)
    assert total_energy(psi, free_potential()) == pytest.approx(1 / (8 * sigma**2), rel=1e-2)


def test_total_energy_harmonic_ground():
    g = make_grid(-12, 12, 512)
    psi = initial_state(g, "gaussian", sigma=np.sqrt(0.5))
    assert total_energy(psi, harmonic_potential(1.0)) == pytest.approx(0.5, rel=1e-2)


def test_unitarity_per_step_and_over_run():
    g = make_grid(-20, 20, 512)
    psi = initial_state(g, "gaussian", sigma=1.0, k0=1.0)
    pot = harmonic_potential(1.0)
    stepped = evolve_step(psi, pot, 0.005)
    assert abs(stepped.norm_squared() - 1.0) < 1e-12
    series = evolve(psi, pot, 2.0, 0.005)
    assert max(abs(s.norm_squared() - 1.0) for s in series.states) < 1e-9


def test_energy_drift_catalog_parameters(catalog_runs):
    for name in ("spreading_gaussian", "harmonic_ground", "barrier"):
        cfg, series = catalog_runs(name)
        pot = cfg.build_potential()
        e0 = total_energy(series.states[0], pot)
        idx = np.linspace(0, len(series) - 1, 8).astype(int)
        drift = max(abs(total_energy(series.states[i], pot) - e0) for i in idx)
        assert drift / abs(e0) < 1e-6, name


def test_time_reversal():
    g = make_grid(-16, 16, 256)
    psi = initial_state(g, "gaussian", sigma=1.0, k0=1.0)
    pot = harmonic_potential(1.0)
    n, dt = 200, 0.005
    forward = evolve(psi, pot, n * dt, dt, store_every=n).states[-1]
    # antiunitary reversal: conjugate, evolve forward, conjugate again
    mirrored = forward.with_amplitudes(np.conj(forward.amplitudes))
    back = evolve(mirrored, pot, n * dt, dt, store_every=n).states[-1]
    recovered = back.with_amplitudes(np.conj(back.amplitudes))
    assert np.max(np.abs(recovered.amplitudes - psi.amplitudes)) < 1e-8


def test_second_order_convergence_in_dt():
    # The split step is exact for free motion, so the order is measured on
    # the harmonic coherent state, which has a closed-form evolution.
    g = make_grid(-12, 12, 512)
    psi = initial_state(g, "gaussian", x0=2.0, sigma=np.sqrt(0.5))
    pot = harmonic_potential(1.0)
    t_final = 1.0
    errors = []
    for dt in (0.02, 0.01):
        series = evolve(psi, pot, t_final, dt, store_every=int(round(t_final / dt)))
        exact = harmonic_coherent_state(g.x, t_final, 2.0)
        errors.append(np.max(np.abs(series.states[-1].amplitudes - exact)))
    order = np.log2(errors[0] / errors[1])
    assert 1.7 < order < 2.3


def test_two_gaussian_slit_potential_is_free_with_geometry():
    g = make_grid(-18, 18, 256)
    pot = two_gaussian_slit(separation=3.0, slit_width=0.5, k_forward=20.0)
    pot.validate(g)
    assert np.all(pot.values(g) == 0.0)
    with pytest.raises(ConfigError):
        two_gaussian_slit(separation=0.8, slit_width=0.5, k_forward=20.0).validate(g)


def test_barrier_edges_must_be_inside_grid():
    g = make_grid(-4, 4, 64)
    with pytest.raises(ConfigError):
        square_barrier(1.0, left=-3.9, right=3.9, ramp=1.0).validate(g)


def test_barrier_profile_plateau_and_metadata():
    g = make_grid(-32, 32, 1024)
    pot = square_barrier(1.5, left=-1.5, right=1.5, ramp=1.0)
    v = pot.values(g)
    # documented shoulder shape: product of two tanh edges
    center = 1.5 * 0.25 * (1 + np.tanh(1.5)) ** 2
    assert v[g.index_of(0.0)] == pytest.approx(center, rel=1e-6)
    assert v[g.index_of(0.0)] > 0.9 * 1.5
    assert abs(v[0]) < 1e-10
    assert pot.ramp_width(g) == 1.0
    w = square_well(1.5, left=-1.5, right=1.5, ramp=1.0).values(g)
    assert np.max(np.abs(w + v)) < 1e-12
