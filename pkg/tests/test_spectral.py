import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import BETA, W0, coherent_config
from gatekeeper import errors, model, quantum_approx, spectral
from gatekeeper.spectral import TimeSeries

OSC = model.OscillatorParams(W0, BETA)


def test_harmonic_hamiltonian_diagonal():
    H = spectral.build_hamiltonian(model.OscillatorParams(W0, 0.0), 0.0, 10)
    np.testing.assert_allclose(H, np.diag(W0 * (np.arange(10) + 0.5)), atol=1e-14)


def test_force_gives_tridiagonal():
    phi = 0.3
    H = spectral.build_hamiltonian(model.OscillatorParams(W0, 0.0), phi, 10)
    n = np.arange(9)
    np.testing.assert_allclose(np.diag(H, 1), phi * np.sqrt((n + 1) / (2 * W0)), atol=1e-14)
    assert np.allclose(np.triu(H, 2), 0)


def test_bandwidth_four():
    H = spectral.build_hamiltonian(OSC, 0.2, 30)
    assert np.allclose(np.triu(H, 5), 0)
    assert np.any(np.diag(H, 4) != 0)
    np.testing.assert_array_equal(H, H.T)


def test_x4_elements_match_matrix_power():
    # elements away from the truncation edge equal those of (X)^4 in a bigger basis
    M = 30
    X = spectral.position_operator(OSC, M + 4)
    X4 = np.linalg.matrix_power(X, 4)[:M, :M]
    H = spectral.build_hamiltonian(OSC, 0.0, M)
    H0 = np.diag(W0 * (np.arange(M) + 0.5))
    np.testing.assert_allclose(H - H0, BETA / 4 * X4, atol=1e-11)


def test_basis_too_small():
    with pytest.raises(errors.BasisTooSmall):
        spectral.build_hamiltonian(OSC, 0.0, 1)


def test_ground_energy_first_order():
    E0 = spectral.solve_branch(OSC, 0.0, 60).energies[0]
    assert abs(E0 - 0.655547) < 1e-3


def test_perturbative_residual_scales_as_beta_squared():
    res = []
    for b in (0.04, 0.02, 0.01, 0.005):
        osc = model.OscillatorParams(W0, b)
        exact = spectral.solve_branch(osc, 0.0, 60).energies[:3]
        approx = quantum_approx.perturbative_spectrum(osc, 2).levels
        res.append(np.abs(exact - approx))
    ratios = np.array(res[:-1]) / np.array(res[1:])
    np.testing.assert_allclose(ratios, 4.0, rtol=0.08)


def test_eigendecompose_examples():
    br = spectral.eigendecompose(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(br.energies, [-1, 1], atol=1e-14)
    br = spectral.eigendecompose(np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(br.energies, [1, 2, 3])
    np.testing.assert_allclose(np.abs(br.vectors), np.eye(3), atol=1e-14)


def test_eigendecompose_rejects_asymmetric():
    with pytest.raises(ValueError):
        spectral.eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_reconstruction(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(50, 50))
    H = (A + A.T) / 2
    br = spectral.eigendecompose(H)
    V, E = br.vectors, br.energies
    norm = np.linalg.norm(H, 2)
    assert np.linalg.norm(V @ np.diag(E) @ V.T - H) < 1e-10 * norm
    assert np.linalg.norm(V.T @ V - np.eye(50)) < 1e-10
    assert np.all(np.diff(E) >= 0)


def test_oscillatory_sum_uniform_and_irregular_agree():
    rng = np.random.default_rng(1)
    omega = rng.normal(size=40)
    F = rng.normal(size=40) + 1j * rng.normal(size=40)
    t = np.linspace(0, 50, 777)
    direct = np.exp(1j * np.outer(t, omega)) @ F
    np.testing.assert_allclose(spectral.oscillatory_sum(t, omega, F), direct, atol=1e-10)
    t2 = np.sort(rng.uniform(0, 50, 300))
    np.testing.assert_allclose(spectral.oscillatory_sum(t2, omega, F),
                               np.exp(1j * np.outer(t2, omega)) @ F, atol=1e-10)


def test_time_series_validation():
    with pytest.raises(ValueError):
        TimeSeries(np.array([0.0, 1.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        TimeSeries(np.array([1.0, 0.0]), np.array([1.0, 2.0]))


def test_t0_is_initial_mean(fig3_spectral):
    assert fig3_spectral.values[0] == pytest.approx(3.0, abs=1e-9)


@pytest.mark.parametrize("dphi", [0.0, 0.1, 0.7])
def test_harmonic_coherence(dphi):
    cfg = coherent_config(1.5, 0.4, beta=0.0, delta_phi=dphi, basis_size=80)
    t = cfg.times
    ref = 1.5 * np.cos(W0 * t) + 0.4 / W0 * np.sin(W0 * t)
    assert np.max(np.abs(spectral.mean_position(cfg).values - ref)) < 1e-8


def test_stationary_harmonic_is_zero():
    cfg = coherent_config(1.0, 0.0, beta=0.0, delta_phi=0.7, basis_size=90)
    assert abs(spectral.stationary_value(cfg)) < 1e-12


def test_stationary_parity_state_is_zero():
    cfg = model.validate(OSC, model.CondensateParams(), model.NumberBasis([0, 1.0]),
                         model.SimulationGrid(np.zeros(1), basis_size=40))
    assert abs(spectral.stationary_value(cfg)) < 1e-12


def test_stationary_matches_late_mean(fig4_spectral, fig4_stationary):
    late = fig4_spectral.times > fig4_spectral.times[-1] / 2
    # average over whole carrier periods to remove the residual oscillation
    assert abs(np.mean(fig4_spectral.values[late]) - fig4_stationary) < 1e-3


def test_density_coefficients_t0():
    cfg = model.validate(OSC, model.CondensateParams(delta_phi=0.7),
                         model.NumberBasis(np.array([1 + 1j, 1j]) / math.sqrt(3)),
                         model.SimulationGrid(np.zeros(1), basis_size=30))
    rho = spectral.density_coefficients(cfg, 0.0).matrix
    c = np.zeros(30, complex)
    c[:2] = cfg.state.coefficients
    np.testing.assert_allclose(rho, np.outer(c, c.conj()), atol=1e-13)


@pytest.mark.parametrize("t", [0.0, 3.7, 25.0])
def test_density_invariants_and_consistency(t):
    cfg = coherent_config(3.0, 0.0, delta_phi=0.1, basis_size=80, quad_nodes=12)
    rho = spectral.density_coefficients(cfg, t).matrix
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
    assert abs(np.trace(rho) - 1) < 1e-10
    assert np.linalg.eigvalsh(rho).min() > -1e-10
    X = spectral.position_operator(cfg.osc, 80)
    x_rho = np.trace(rho @ X).real
    x_ser = spectral.mean_position(cfg, times=[t]).values[0]
    assert abs(x_rho - x_ser) < 1e-10
    purity = np.trace(rho @ rho).real
    assert purity <= 1 + 1e-10


def test_branch_energy_and_purity_conserved():
    cfg = coherent_config(3.0, 0.0, delta_phi=0.1, basis_size=80, quad_nodes=6)
    for t in (0.0, 10.0, 40.0):
        for w, psi, br in spectral.branch_states(cfg, t):
            H = spectral.build_hamiltonian(cfg.osc, br.force, 80)
            E = np.vdot(psi, H @ psi).real
            if t == 0:
                continue
            psi0 = next(p for ww, p, b in spectral.branch_states(cfg, 0.0) if b.force == br.force)
            assert abs(E - np.vdot(psi0, H @ psi0).real) < 1e-10 * max(1, abs(E))
            assert abs(np.vdot(psi, psi).real - 1) < 1e-10


def test_basis_convergence_fig3(fig3, fig3_spectral):
    big = fig3.with_grid(basis_size=int(fig3.grid.basis_size * 1.2))
    diff = np.max(np.abs(spectral.mean_position(big).values - fig3_spectral.values))
    assert diff / np.max(np.abs(fig3_spectral.values)) < 1e-6


def test_basis_convergence_fig4(fig4, fig4_spectral):
    big = fig4.with_grid(basis_size=int(fig4.grid.basis_size * 1.2))
    diff = np.max(np.abs(spectral.mean_position(big).values - fig4_spectral.values))
    assert diff / np.max(np.abs(fig4_spectral.values)) < 1e-6


def test_ensemble_mirror_invariance(fig3, fig3_spectral):
    mirrored = spectral.mean_position(fig3, fig3.ensemble.mirrored())
    assert np.max(np.abs(mirrored.values - fig3_spectral.values)) < 1e-12


def test_simultaneous_parity_flip():
    cfg = coherent_config(2.0, 0.5, delta_phi=0.3, basis_size=80, quad_nodes=10)
    flip = coherent_config(-2.0, -0.5, delta_phi=0.3, basis_size=80, quad_nodes=10)
    a = spectral.mean_position(cfg)
    b = spectral.mean_position(flip, cfg.ensemble.mirrored())
    np.testing.assert_allclose(b.values, -a.values, atol=1e-10)


def test_thread_count_bit_stable(fig3):
    a = spectral.mean_position(fig3, workers=1).values
    b = spectral.mean_position(fig3, workers=4).values
    np.testing.assert_array_equal(a, b)


def test_truncation_warning():
    cfg = coherent_config(3.0, 0.0, delta_phi=0.1, basis_size=42)
    with pytest.warns(errors.TruncationWarning):
        spectral.mean_position(cfg)


@pytest.mark.filterwarnings("ignore::gatekeeper.errors.TruncationWarning")
def test_quadrature_K40_vs_K48_fig4(fig4):
    t = np.linspace(0, 60 / W0, 601)
    a = spectral.mean_position(fig4.with_grid(times=t, quad_rule="gauss-hermite", quad_nodes=40))
    b = spectral.mean_position(fig4.with_grid(times=t, quad_rule="gauss-hermite", quad_nodes=48))
    assert np.max(np.abs(a.values - b.values)) < 1e-8
