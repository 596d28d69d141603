import math

import numpy as np
import pytest
from scipy import integrate

from conftest import BETA, W0
from gatekeeper import errors, model, quantum_approx as qa, spectral

OSC = model.OscillatorParams(W0, BETA)
C0, C1 = (1 + 1j) / math.sqrt(3), 1j / math.sqrt(3)


def test_harmonic_spectrum():
    s = qa.perturbative_spectrum(model.OscillatorParams(W0, 0.0), 4)
    np.testing.assert_allclose(s.levels, W0 * (np.arange(5) + 0.5))
    np.testing.assert_allclose(s.curvatures, -1 / (2 * W0**2))


def test_ground_level_substitution():
    s = qa.perturbative_spectrum(OSC, 3)
    assert s.levels[0] == pytest.approx(0.655547, abs=1e-6)
    assert np.all(np.diff(s.levels) > 0)
    np.testing.assert_allclose(np.diff(s.curvatures), 3 * BETA / (2 * W0**5))
    assert s.transition(0) == pytest.approx(s.levels[0] - s.levels[1])


def test_strong_anharmonicity_warns():
    with pytest.warns(errors.AnharmonicityWarning):
        qa.perturbative_spectrum(model.OscillatorParams(1.0, 0.2), 2)


def test_displaced_ground_state():
    assert qa.displaced_eigenstate(0, 0.0, 0.0, OSC) == pytest.approx((W0 / math.pi) ** 0.25)
    x = np.linspace(-5, 5, 2001)
    phi = 0.4
    amp = qa.displaced_eigenstate(0, phi, x, OSC)
    assert x[np.argmax(amp)] == pytest.approx(phi / W0**2, abs=5e-3)


@pytest.mark.parametrize("n", range(7))
def test_displaced_normalisation(n):
    val = integrate.quad(lambda x: qa.displaced_eigenstate(n, 0.3, x, OSC) ** 2, -12, 12,
                         epsabs=1e-13, limit=200)[0]
    assert val == pytest.approx(1, abs=1e-10)


def test_g_coefficients_zero_coherence():
    g = qa.g_coefficients(1.0, 0.0, OSC)
    for poly in g.values():
        assert poly.g0 == 0 and poly.g2 == 0


def test_g_coefficients_fig4():
    g = qa.g_coefficients(C0, C1, OSC)
    assert g[(1, 2)].g0 == 0
    assert g[(0, 1)].g0 == pytest.approx(math.sqrt(1 / (2 * W0)) * (1 + 1j) * (-1j) / 3)
    c = math.sqrt(2 * W0) / (4 * W0**4)
    cross = np.conj(C0) * C1
    assert g[(0, 1)].g2 == pytest.approx(-c * (cross + C0 * np.conj(C1)))
    assert g[(1, 2)].g2 == pytest.approx(c * (cross + 2 * C0 * np.conj(C1)))


def brute_force_G(phi):
    """F_01 and F_12 times exp(+phi^2/2 m hbar w0^3), from quadrature overlaps of displaced states."""
    def overlap(k, n):
        return integrate.quad(lambda x: qa.displaced_eigenstate(k, phi, x, OSC)
                              * qa.displaced_eigenstate(n, 0.0, x, OSC),
                              -12, 12, epsabs=1e-14, limit=200)[0]
    a = [overlap(k, 0) * C0 + overlap(k, 1) * C1 for k in range(3)]
    scale = math.exp(phi**2 / (2 * W0**3))
    return (a[0] * np.conj(a[1]) * math.sqrt(1 / (2 * W0)) * scale,
            a[1] * np.conj(a[2]) * math.sqrt(2 / (2 * W0)) * scale)


def test_g_coefficients_against_brute_force():
    phis = np.array([0.01, 0.02, 0.03, 0.04])
    # even part only: odd powers drop out of the force average
    vals = np.array([(np.array(brute_force_G(p)) + np.array(brute_force_G(-p))) / 2 for p in phis])
    g = qa.g_coefficients(C0, C1, OSC)
    for k, pair in enumerate([(0, 1), (1, 2)]):
        fit = np.polyfit(phis**2, vals[:, k].real, 2) + 1j * np.polyfit(phis**2, vals[:, k].imag, 2)
        assert abs(fit[2] - g[pair].g0) < 1e-9
        assert abs(fit[1] - g[pair].g2) < 1e-8


def test_unnormalized_rejected():
    with pytest.raises(errors.UnnormalizedState):
        qa.g_coefficients(1.0, 0.5, OSC)


def test_harmonic_limit_no_decay():
    osc = model.OscillatorParams(W0, 0.0)
    t = np.linspace(0, 500, 5001)
    x = qa.approx_mean_position(C0, C1, osc, 0.7, t, stationary=0.0)
    env = np.abs(x.values)
    late = t > 400
    assert env[late].max() == pytest.approx(env.max(), rel=1e-3)


def test_large_t_square_root_law():
    rng = np.array([1e5, 4e5])
    env = np.abs(qa.envelope_aprox0(C0, C1, OSC, 0.7, rng))
    assert env[1] / env[0] == pytest.approx(0.5, rel=1e-3)


def test_envelope_aprox0_t0_and_monotone():
    g0 = qa.g_coefficients(C0, C1, OSC)[(0, 1)].g0
    e0 = qa.envelope_aprox0(C0, C1, OSC, 0.7, 0.0)
    assert abs(e0) == pytest.approx(2 * abs(g0) / math.sqrt(1 + 2 * 0.49 / (2 * W0**3)))
    env = np.abs(qa.envelope_aprox0(C0, C1, OSC, 0.7, np.linspace(0, 3000, 301)))
    assert np.all(np.diff(env) < 0)


def test_continuous_series():
    t = np.linspace(0, 3000, 60001)
    x = qa.approx_mean_position(C0, C1, OSC, 0.7, t, stationary=0.0).values
    dt = t[1] - t[0]
    amp = np.abs(x).max()
    # neighbouring samples differ by at most the carrier slope times the step
    assert np.max(np.abs(np.diff(x))) < 1.5 * amp * 1.4 * dt


def test_zero_spread_rejected():
    with pytest.raises(errors.NonPositiveSpread):
        qa.approx_mean_position(C0, C1, OSC, 0.0, [0.0], stationary=0.0)


def test_default_stationary_from_spectral():
    x = qa.approx_mean_position(C0, C1, OSC, 0.7, [0.0])
    cfg = model.validate(OSC, model.CondensateParams(delta_phi=0.7), model.NumberBasis([C0, C1]),
                         model.SimulationGrid(np.zeros(1), basis_size=60))
    assert x.values[0] - spectral.stationary_value(cfg) == pytest.approx(
        qa.approx_mean_position(C0, C1, OSC, 0.7, [0.0], stationary=0.0).values[0])


def test_aprox1_beats_aprox0(fig4, fig4_spectral, fig4_stationary):
    t = fig4.times
    a1 = qa.approx_mean_position(C0, C1, OSC, 0.7, t, fig4_stationary).values
    a0 = qa.aprox0_mean_position(C0, C1, OSC, 0.7, t, fig4_stationary).values
    e1 = np.max(np.abs(a1 - fig4_spectral.values))
    e0 = np.max(np.abs(a0 - fig4_spectral.values))
    assert e1 < e0


def test_aprox0_envelope_bounds_qualitatively(fig4, fig4_spectral, fig4_stationary):
    env = np.abs(qa.envelope_aprox0(C0, C1, OSC, 0.7, fig4.times))
    dev = np.abs(fig4_spectral.values - fig4_stationary)
    assert dev.max() < 1.5 * env.max()
