import numpy as np
import pytest

from oracles import cat_state_wigner, gaussian_wigner
from qflow.errors import MaskedRegionError
from qflow.grids import WaveFunction, make_grid, normalize, spectral_derivative
from qflow.polar import bohm_momentum, polar_decompose
from qflow.schrodinger import initial_state
from qflow.wigner import (
    _theta_sums,
    _theta_sums_direct,
    conditional_momentum_derivative,
    conditional_momentum_derivative_profile,
    conditional_momentum_integral,
    conditional_momentum_profile,
    equivalence_report,
    momentum_density_reference,
    momentum_routes,
    wigner_transform,
)


def _plane_wave(n=256):
    g = make_grid(-16, 16, n)
    k0 = 2 * np.pi * 8 / g.length
    return initial_state(g, "plane_wave", k0=k0), k0


def test_wigner_gaussian_matches_analytic_and_positive():
    g = make_grid(-16, 16, 256)
    sigma = 1.0
    psi = initial_state(g, "gaussian", sigma=sigma)
    w = wigner_transform(psi)
    xg, pg = np.meshgrid(w.x, w.p, indexing="ij")
    assert np.max(np.abs(w.values - gaussian_wigner(xg, pg, sigma))) < 1e-10
    assert w.values.min() >= -1e-10


def test_wigner_plane_wave_concentrates_on_momentum_line():
    psi, k0 = _plane_wave()
    w = wigner_transform(psi)
    marginal = w.momentum_marginal()
    peak = np.argmax(marginal)
    assert w.p[peak] == pytest.approx(k0, abs=1e-12)
    # single-bin line: all mass in that momentum bin
    assert marginal[peak] * w.dp == pytest.approx(1.0, abs=1e-10)
    rows_peak = np.argmax(w.values, axis=1)
    assert np.all(w.p[rows_peak] == w.p[peak])


def test_wigner_cat_state_interference_ridge():
    g = make_grid(-16, 16, 512)
    a, sigma = 2.0, 0.5
    psi = initial_state(g, "two_gaussian", sigma=sigma, separation=2 * a)
    w = wigner_transform(psi)
    xg, pg = np.meshgrid(w.x, w.p, indexing="ij")
    assert np.max(np.abs(w.values - cat_state_wigner(xg, pg, a, sigma))) < 1e-8
    j0 = g.index_of(0.0)
    i0 = np.argmin(np.abs(w.p))
    assert w.values[j0, i0] == pytest.approx(1.0 / np.pi, rel=1e-6)
    # first negative lobe of the midpoint ridge near p = pi hbar / separation
    i_neg = np.argmin(np.abs(w.p - np.pi / (2 * a)))
    assert w.values[j0, i_neg] < 0


def test_wigner_marginals_packets(spreading_run, two_slit_run):
    for _, series in (spreading_run, two_slit_run):
        state = series.states[-1]
        w = wigner_transform(state)
        assert np.max(np.abs(w.position_marginal() - state.rho())) < 1e-6
        ref = momentum_density_reference(state, w.p)
        assert np.max(np.abs(w.momentum_marginal() - ref)) < 1e-6


def test_wigner_first_moment_matches_current(spreading_run):
    _, series = spreading_run
    state = series.states[-1]
    w = wigner_transform(state)
    current = state.hbar * np.imag(np.conj(state.amplitudes) * spectral_derivative(state))
    assert np.max(np.abs(w.conditional_moment() - current)) < 1e-6


def test_theta_sums_fft_equals_direct_loop():
    g = make_grid(-12, 12, 64)
    psi = initial_state(g, "gaussian", sigma=1.0, k0=0.7)
    t1, c1, b1 = _theta_sums(psi)
    t2, c2, b2 = _theta_sums_direct(psi)
    assert np.array_equal(t1, t2)
    assert np.max(np.abs(c1 - c2)) < 1e-12
    assert np.max(np.abs(b1 - b2)) < 1e-12


def test_conditional_momentum_integral_plane_wave():
    psi, k0 = _plane_wave()
    assert conditional_momentum_integral(psi, 0.0) == pytest.approx(k0, abs=1e-10)


def test_conditional_momentum_integral_static_gaussian():
    g = make_grid(-16, 16, 256)
    psi = initial_state(g, "gaussian", sigma=1.0)
    for x in (-1.5, 0.0, 2.0):
        assert abs(conditional_momentum_integral(psi, g.x[g.index_of(x)])) < 1e-9


def test_conditional_momentum_integral_matches_grad_s(spreading_run):
    _, series = spreading_run
    state = series.states[-1]
    grad_s = bohm_momentum(polar_decompose(state))
    g = state.grid
    for x in (-2.0, 0.5, 1.75):
        j = g.index_of(x)
        assert conditional_momentum_integral(state, g.x[j]) == pytest.approx(
            grad_s.values[j], abs=1e-6
        )


def test_conditional_momentum_profile_matches_pointwise(spreading_run):
    _, series = spreading_run
    state = series.states[-1]
    profile, mask = conditional_momentum_profile(state)
    g = state.grid
    j = g.index_of(1.0)
    assert not mask[j]
    assert profile[j] == pytest.approx(conditional_momentum_integral(state, g.x[j]), abs=1e-12)


def test_conditional_momentum_derivative_trio(spreading_run):
    psi, k0 = _plane_wave()
    assert conditional_momentum_derivative(psi, 0.0) == pytest.approx(k0, abs=1e-10)
    g = make_grid(-16, 16, 256)
    static = initial_state(g, "gaussian", sigma=1.0)
    assert abs(conditional_momentum_derivative(static, 0.0)) < 1e-12
    _, series = spreading_run
    state = series.states[-1]
    profile, mask = conditional_momentum_derivative_profile(state)
    grad_s = bohm_momentum(polar_decompose(state))
    ok = ~(mask | grad_s.mask)
    assert np.max(np.abs(profile[ok] - grad_s.values[ok])) < 1e-6


def test_conditional_momentum_node_error():
    g = make_grid(-16, 16, 512)
    plus = np.exp(-((g.x - 2.0) ** 2))
    minus = np.exp(-((g.x + 2.0) ** 2))
    odd = normalize(WaveFunction(g, (plus - minus).astype(complex)))
    with pytest.raises(MaskedRegionError):
        conditional_momentum_integral(odd, 0.0)
    with pytest.raises(MaskedRegionError):
        conditional_momentum_derivative(odd, 0.0)


def test_equivalence_plane_wave_tight():
    psi, _ = _plane_wave()
    report = equivalence_report(psi)
    assert report.max_deviation < 1e-8
    assert report.passed


def test_equivalence_spreading(spreading_run):
    _, series = spreading_run
    report = equivalence_report(series.states[-1], tolerance=1e-5)
    assert report.passed


def test_equivalence_two_slit_interference_time(two_slit_run):
    cfg, series = two_slit_run
    report = equivalence_report(series.states[-1], tolerance=1e-5, eta=cfg.eta)
    assert report.passed
    assert report.n_points > 1000


def test_galilean_boost_shifts_all_routes(spreading_run):
    _, series = spreading_run
    state = series.states[len(series) // 2]
    g = state.grid
    kb = 2 * np.pi * 3 / g.length
    boosted = state.with_amplitudes(state.amplitudes * np.exp(1j * kb * g.x))
    base, m0 = momentum_routes(state)
    shifted, m1 = momentum_routes(boosted)
    ok = ~(m0 | m1)
    for name in base:
        dev = np.abs(shifted[name][ok] - base[name][ok] - kb)
        assert np.max(dev) < 1e-7, name
