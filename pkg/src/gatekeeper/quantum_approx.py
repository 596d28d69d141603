"""Analytic approximation of <X(t)> for initial states on the two lowest levels.

Energies are expanded to second order in the force and first order in beta,
E_i(phi) = E_i + gamma_i phi^2, and the overlap factors to zeroth order in
beta, F_ij(phi) = (g0 + g2 phi^2) exp(-phi^2 / 2 m hbar w0^3).  The Gaussian
force average is then done in closed form, leaving algebraic envelopes.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from . import errors
from .model import HBAR, NORM_TOL, OscillatorParams
from .spectral import TimeSeries

PERTURBATIVE_LIMIT = 0.1


@dataclass(frozen=True)
class PerturbativeSpectrum:
    levels: np.ndarray
    curvatures: np.ndarray

    @property
    def i_max(self) -> int:
        return self.levels.size - 1

    def transition(self, n: int) -> float:
        """omega_{n,n+1} = E_n - E_{n+1} (negative)."""
        return float(self.levels[n] - self.levels[n + 1])


def perturbative_spectrum(osc: OscillatorParams, i_max: int) -> PerturbativeSpectrum:
    m, w0, b = osc.m, osc.omega0, osc.beta
    small = b * HBAR / (m**2 * w0**3)
    if small >= PERTURBATIVE_LIMIT:
        warnings.warn(f"beta hbar / m^2 w0^3 = {small:.3g} is not small",
                      errors.AnharmonicityWarning, stacklevel=2)
    i = np.arange(i_max + 1, dtype=float)
    E = HBAR * w0 * (i + 0.5) + 3 * HBAR**2 * b * (i**2 + i + 0.5) / (8 * m**2 * w0**2)
    gamma = -1 / (2 * m * w0**2) + 3 * HBAR * b * (2 * i + 1) / (4 * m**3 * w0**5)
    return PerturbativeSpectrum(E, gamma)


def displaced_eigenstate(n: int, phi: float, x, osc: OscillatorParams):
    """<x|psi_n^phi> for the harmonic level n centred at phi / (m w0^2).

    The centre follows the printed argument y = sqrt(m w0/hbar)(x - phi/m w0^2);
    the physical minimum of H + phi X is at -phi/(m w0^2).  Only even-in-phi
    quantities are built from these states, so the sign does not propagate.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    m, w0 = osc.m, osc.omega0
    y = math.sqrt(m * w0 / HBAR) * (np.asarray(x, dtype=float) - phi / (m * w0**2))
    # normalised Hermite functions by recurrence (no factorial overflow)
    prev = np.zeros_like(y)
    cur = np.pi**-0.25 * np.exp(-y**2 / 2)
    for k in range(n):
        prev, cur = cur, math.sqrt(2.0 / (k + 1)) * y * cur - math.sqrt(k / (k + 1)) * prev
    return (m * w0 / HBAR) ** 0.25 * cur


@dataclass(frozen=True)
class OverlapPolynomial:
    pair: Tuple[int, int]
    g0: complex
    g2: complex

    def __call__(self, phi):
        return self.g0 + self.g2 * np.asarray(phi) ** 2


def _check_two_level(c0: complex, c1: complex) -> None:
    norm = abs(c0) ** 2 + abs(c1) ** 2
    if abs(norm - 1) > NORM_TOL:
        raise errors.UnnormalizedState(f"|c0|^2 + |c1|^2 = {norm!r}, expected 1")


def g_coefficients(c0: complex, c1: complex, osc: OscillatorParams) -> Dict[Tuple[int, int], OverlapPolynomial]:
    _check_two_level(c0, c1)
    m, w0 = osc.m, osc.omega0
    s = math.sqrt(2 * m * w0 / HBAR) / (4 * m**2 * w0**4)
    cross = np.conj(c0) * c1
    return {
        (0, 1): OverlapPolynomial((0, 1), math.sqrt(HBAR / (2 * m * w0)) * c0 * np.conj(c1),
                                  -s * (cross + c0 * np.conj(c1))),
        (1, 2): OverlapPolynomial((1, 2), 0j, s * (cross + 2 * c0 * np.conj(c1))),
    }


def _stationary(c0, c1, osc, delta_phi) -> float:
    from . import model, spectral
    state = model.NumberBasis([c0, c1])
    cfg = model.validate(osc, model.CondensateParams(delta_phi=delta_phi), state,
                         model.SimulationGrid(np.zeros(1), basis_size=60))
    return spectral.stationary_value(cfg)


def approx_mean_position(c0: complex, c1: complex, osc: OscillatorParams, delta_phi: float,
                         times, stationary: Optional[float] = None) -> TimeSeries:
    """Two-term algebraic-envelope approximation of <X(t)>.

    ``stationary`` is the time-independent part; when omitted it is taken
    from the exact spectral engine.
    """
    if not delta_phi > 0:
        raise errors.NonPositiveSpread("the approximation needs a positive force spread")
    t = np.asarray(times, dtype=float)
    g = g_coefficients(c0, c1, osc)
    spec = perturbative_spectrum(osc, 2)
    if stationary is None:
        stationary = _stationary(c0, c1, osc, delta_phi)
    base = 1 / (2 * delta_phi**2) + 1 / (2 * osc.m * HBAR * osc.omega0**3)
    total = np.zeros(t.size, dtype=complex)
    for n in (0, 1):
        poly = g[(n, n + 1)]
        a = base + 1j * (spec.curvatures[n] - spec.curvatures[n + 1]) * t
        total += (np.exp(-1j * spec.transition(n) * t) / math.sqrt(2 * delta_phi**2)
                  * (poly.g0 * np.sqrt(1 / a) + 0.5 * poly.g2 * (1 / a) ** 1.5))
    return TimeSeries(t, stationary + 2 * total.real, method="approx")


def envelope_aprox0(c0: complex, c1: complex, osc: OscillatorParams, delta_phi: float, t):
    """Complex envelope of the single-term approximation.

    <X(t)> ~ stationary + Re[envelope * exp(-i omega_01 t)].  The modulus
    2|g0| |1 + dphi^2/(m hbar w0^3) - 3i dphi^2 hbar beta t/(m^3 w0^5)|^(-1/2)
    decays as t^(-1/2).
    """
    g0 = g_coefficients(c0, c1, osc)[(0, 1)].g0
    m, w0 = osc.m, osc.omega0
    t = np.asarray(t, dtype=float)
    # sign of the t-term follows gamma_0 - gamma_1 = -3 hbar beta / (2 m^3 w0^5)
    d = 1 + 2 * delta_phi**2 / (2 * m * HBAR * w0**3) - 3j * delta_phi**2 * HBAR * osc.beta / (m**3 * w0**5) * t
    return 2 * g0 * np.sqrt(1 / d)


def aprox0_mean_position(c0, c1, osc, delta_phi, times, stationary: Optional[float] = None) -> TimeSeries:
    t = np.asarray(times, dtype=float)
    if stationary is None:
        stationary = _stationary(c0, c1, osc, delta_phi)
    w01 = perturbative_spectrum(osc, 1).transition(0)
    env = envelope_aprox0(c0, c1, osc, delta_phi, t)
    return TimeSeries(t, stationary + (env * np.exp(-1j * w01 * t)).real, method="aprox0")
