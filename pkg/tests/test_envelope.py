import math

import numpy as np
import pytest

from conftest import W0
from gatekeeper import envelope_analysis as ea, errors
from gatekeeper.spectral import TimeSeries


def test_constant_sinusoid():
    t = np.linspace(0, 40, 4001)
    env = ea.extract_envelope(TimeSeries(t, 1.7 * np.cos(3.1 * t + 0.4)))
    np.testing.assert_allclose(env.values, 1.7, atol=1e-4 * 1.7)


def test_damped_cosine():
    t = np.linspace(0, 5, 20001)
    env = ea.extract_envelope(TimeSeries(t, np.exp(-t) * np.cos(10 * t)))
    np.testing.assert_allclose(env.values, np.exp(-env.times), rtol=0.01)


def test_too_few_periods():
    t = np.linspace(0, 4 * 2 * math.pi, 500)
    with pytest.raises(errors.TooFewPeaks):
        ea.extract_envelope(TimeSeries(t, np.sin(t)))


def test_baseline_subtracted():
    t = np.linspace(0, 40, 4001)
    env = ea.extract_envelope(TimeSeries(t, 0.3 + np.cos(2 * t)), baseline=0.3)
    np.testing.assert_allclose(env.values, 1.0, atol=1e-4)


def test_gaussian_recovery():
    t = np.linspace(0, 6, 61)
    fit = ea.fit_gaussian(TimeSeries(t, np.exp(-t**2 / 8)))
    assert fit.params["t_G"] == pytest.approx(2.0, abs=1e-6)
    assert fit.model == "gaussian" and math.isfinite(fit.residual)


def test_gaussian_constant_is_infinite():
    t = np.linspace(0, 6, 61)
    assert math.isinf(ea.fit_gaussian(TimeSeries(t, np.full(61, 2.0))).params["t_G"])


def test_powerlaw_recovery():
    t = np.linspace(1, 100, 300)
    fit = ea.fit_powerlaw(TimeSeries(t, 3 * t**-2.5))
    assert fit.params["exponent"] == pytest.approx(-2.5, abs=1e-6)
    assert fit.params["prefactor"] == pytest.approx(3.0, abs=1e-6)


def test_nonpositive_envelope():
    t = np.linspace(1, 10, 10)
    v = np.ones(10)
    v[3] = 0
    with pytest.raises(errors.NonPositiveEnvelope):
        ea.fit_powerlaw(TimeSeries(t, v))
    with pytest.raises(errors.NonPositiveEnvelope):
        ea.fit_gaussian(TimeSeries(t, v))


def test_empty_window_rejected():
    t = np.linspace(1, 10, 10)
    with pytest.raises(ValueError):
        ea.fit_powerlaw(TimeSeries(t, t), (20, 30))


def test_powerlaw_window_must_be_positive():
    t = np.linspace(0, 10, 11)
    with pytest.raises(ValueError):
        ea.fit_powerlaw(TimeSeries(t, t + 1))


def test_window_shift_stability():
    t = np.linspace(50, 4000, 20001)
    x = 2 * t**-0.5 * np.cos(1.3 * t)
    env = ea.extract_envelope(TimeSeries(t, x))
    a = ea.fit_powerlaw(env, (500, 3000))
    ts = env.times[(env.times >= 500)]
    b = ea.fit_powerlaw(env, (ts[1], 3000 + (ts[1] - ts[0])))
    assert abs(a.params["exponent"] - b.params["exponent"]) < max(a.stderr, 1e-12)


def test_carrier_frequency():
    t = np.linspace(0, 100, 10001)
    assert ea.carrier_frequency(TimeSeries(t, np.cos(W0 * t + 0.2))) == pytest.approx(W0, rel=1e-6)


def test_fig4_exact_late_exponent(fig4_spectral, fig4_stationary):
    env = ea.extract_envelope(fig4_spectral, fig4_stationary)
    fit = ea.fit_powerlaw(env, (1000 / W0, 4000 / W0))
    assert abs(fit.params["exponent"] + 0.5) < 0.15
