"""Quasiclassical dynamics: Lindstedt trajectories averaged over the initial
Wigner function and the force distribution.

Each branch follows the harmonic motion about the displaced minimum with a
frequency strained to first order in beta,

    X(x, p, t) = -phi/(m w0^2) + (phi/(m w0^2) + x) cos(w1 t) + p/(m w0) sin(w1 t),
    w1 = w0 (1 + beta * detuning(x, p, phi)).

For a coherent initial state the average over (x, p, phi) is a Gaussian
integral of exp(i w1 t), evaluated here both in closed form and by a
tensor Gauss-Hermite rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import errors
from .model import HBAR, DEFAULT_ANHARMONICITY_THRESHOLD, OscillatorParams, ValidatedConfig
from .spectral import TimeSeries

DET_GUARD = 1e-30
DEFAULT_PHASE_NODES = 48
SHORT_TIME_FRACTION = 0.5
LONG_TIME_FACTOR = 10.0


def classical_energy(x, p, phi, osc: OscillatorParams):
    """H0 = p^2/2m + m w0^2 x^2/2 + phi x (quartic term excluded)."""
    return p**2 / (2 * osc.m) + 0.5 * osc.m * osc.omega0**2 * x**2 + phi * x


def detuning(x, p, phi, osc: OscillatorParams):
    m, w0 = osc.m, osc.omega0
    return (3.0 / (4 * (m * w0**2) ** 2) * classical_energy(x, p, phi, osc)
            + 15.0 / (8 * m**3 * w0**6) * phi**2)


def lindstedt_frequency(x, p, phi, osc: OscillatorParams):
    return osc.omega0 * (1.0 + osc.beta * detuning(x, p, phi, osc))


@dataclass(frozen=True)
class LindstedtTrajectory:
    x: float
    p: float
    force: float
    omega1: float
    osc: OscillatorParams

    @classmethod
    def start(cls, x, p, phi, osc: OscillatorParams) -> "LindstedtTrajectory":
        return cls(x, p, phi, float(lindstedt_frequency(x, p, phi, osc)), osc)

    def position(self, t):
        return _branch_position(self.x, self.p, self.force, self.omega1, t, self.osc)


def _branch_position(x, p, phi, w1, t, osc):
    shift = phi / (osc.m * osc.omega0**2)
    return -shift + (shift + x) * np.cos(w1 * t) + p / (osc.m * osc.omega0) * np.sin(w1 * t)


def lindstedt_position(x, p, phi, t, osc: OscillatorParams,
                       threshold: float = DEFAULT_ANHARMONICITY_THRESHOLD):
    """Branch position at time ``t``; warns when beta A^2/(m w0^2) > ``threshold``."""
    shift = phi / (osc.m * osc.omega0**2)
    amplitude = math.hypot(x + shift, p / (osc.m * osc.omega0))
    osc.check_anharmonicity(amplitude, threshold)
    return LindstedtTrajectory.start(x, p, phi, osc).position(t)


def _coherent(config: ValidatedConfig):
    if config.coherent is None:
        raise errors.NonCoherentState("the quasiclassical engine needs a coherent initial state")
    return config.coherent


def _spread(config: ValidatedConfig) -> float:
    if config.bec.mode != "continuum":
        raise errors.WrongMode("the closed form needs a continuum force distribution")
    return config.bec.delta_phi


@dataclass(frozen=True)
class GeneratingFunction:
    """Gaussian data of Z(J) = N exp(-C) exp((B+J)^T A^-1 (B+J) / 2) / sqrt(det A).

    Arrays carry a leading time axis.  With a zero force spread the phi row
    and column are dropped and A is 2 x 2.
    """
    times: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    delta_phi: float
    osc: OscillatorParams

    @classmethod
    def build(cls, osc: OscillatorParams, x0: float, p0: float, delta_phi: float, times):
        t = np.atleast_1d(np.asarray(times, dtype=float))
        m, w0, b = osc.m, osc.omega0, osc.beta
        dim = 3 if delta_phi > 0 else 2
        A = np.zeros((t.size, dim, dim), dtype=complex)
        A[:, 0, 0] = 2 * m * w0 / HBAR - 3j * t * b / (4 * m * w0)
        A[:, 1, 1] = 2 / (m * HBAR * w0) - 3j * t * b / (4 * m**3 * w0**3)
        if dim == 3:
            A[:, 0, 2] = A[:, 2, 0] = -3j * t * b / (4 * m**2 * w0**3)
            A[:, 2, 2] = 1 / delta_phi**2 - 15j * t * b / (4 * m**3 * w0**5)
        B = np.zeros(dim, dtype=complex)
        B[0] = 2 * m * w0 * x0 / HBAR
        B[1] = 2 * p0 / (m * w0 * HBAR)
        C = -1j * w0 * t + 2 / (HBAR * w0) * (p0**2 / (2 * m) + 0.5 * m * w0**2 * x0**2)
        return cls(t, A, B, C, float(delta_phi), osc)

    def sqrt_det(self) -> np.ndarray:
        # det A = A_pp * (A_xx A_ff - A_xf^2); for t >= 0 both factors stay in the
        # closed lower half plane, so principal roots give the branch continuous
        # in t that starts from the positive root at t = 0.
        A = self.A
        if A.shape[1] == 3:
            outer = A[:, 0, 0] * A[:, 2, 2] - A[:, 0, 2] ** 2
        else:
            outer = A[:, 0, 0]
        root = np.sqrt(A[:, 1, 1]) * np.sqrt(outer)
        if np.any(np.abs(root) ** 2 < DET_GUARD):
            raise errors.SingularGaussian("det A vanishes on the time grid")
        return root

    def moments(self):
        """Return Z(0) and the first moments z_bar_i = Z(0) (A^-1 B)_i."""
        sq = self.sqrt_det()
        y = np.linalg.solve(self.A, np.broadcast_to(self.B, self.A.shape[:2])[..., None])[..., 0]
        if self.A.shape[1] == 3:
            norm = 2.0 / (HBAR * self.delta_phi)
        else:
            norm = 2.0 / HBAR
        Z0 = norm * np.exp(0.5 * (y @ self.B) - self.C) / sq
        return Z0, Z0[:, None] * y

    def mean_position(self) -> np.ndarray:
        _, zbar = self.moments()
        m, w0 = self.osc.m, self.osc.omega0
        x = zbar[:, 0].real + zbar[:, 1].imag / (m * w0)
        if zbar.shape[1] == 3:
            x = x + zbar[:, 2].real / (m * w0**2)
        return x


def mean_position_closed_form(config: ValidatedConfig, times=None) -> TimeSeries:
    """<X(t)> from the analytic Gaussian average of the Lindstedt branches."""
    state = _coherent(config)
    t = config.times if times is None else np.asarray(times, dtype=float)
    gen = GeneratingFunction.build(config.osc, state.x0, state.p0, _spread(config), t)
    return TimeSeries(t, gen.mean_position(), method="quasiclassical-closed")


def mean_position_quadrature(config: ValidatedConfig, times=None,
                             phase_nodes: int = DEFAULT_PHASE_NODES,
                             force_nodes: Optional[int] = None,
                             prune: float = 1e-18) -> TimeSeries:
    """<X(t)> by tensor quadrature over (x, p, phi) of the Lindstedt branches.

    x and p use Gauss-Hermite nodes of the coherent-state Wigner function;
    phi uses ``force_nodes`` Gauss-Hermite nodes of the force density (or the
    configured ensemble when ``force_nodes`` is None).  Product weights below
    ``prune`` times the largest are skipped.
    """
    state = _coherent(config)
    osc = config.osc
    t = config.times if times is None else np.asarray(times, dtype=float)
    xi, wi = np.polynomial.hermite_e.hermegauss(phase_nodes)
    wi = wi / wi.sum()
    sx = math.sqrt(HBAR / (2 * osc.m * osc.omega0))
    sp = math.sqrt(osc.m * HBAR * osc.omega0 / 2)
    if force_nodes is None:
        phis, wf = config.ensemble.forces, config.ensemble.weights
    else:
        from .ensemble import quadrature_ensemble
        ens = quadrature_ensemble(config.bec.delta_phi if config.bec.mode == "continuum"
                                  else math.sqrt(config.bec.force_variance), force_nodes)
        phis, wf = ens.forces, ens.weights
    X, P, F = np.meshgrid(state.x0 + sx * xi, state.p0 + sp * xi, phis, indexing="ij")
    Wt = wi[:, None, None] * wi[None, :, None] * wf[None, None, :]
    keep = Wt > prune * Wt.max()
    X, P, F, Wt = X[keep], P[keep], F[keep], Wt[keep]
    w1 = lindstedt_frequency(X, P, F, osc)
    shift = F / (osc.m * osc.omega0**2)
    amp = (shift + X) * Wt
    amq = P / (osc.m * osc.omega0) * Wt
    offset = -float(np.sum(shift * Wt))
    out = np.empty(t.size)
    rows = max(1, (1 << 22) // X.size)
    for s in range(0, t.size, rows):
        ph = np.outer(t[s:s + rows], w1)
        out[s:s + rows] = offset + np.cos(ph) @ amp + np.sin(ph) @ amq
    return TimeSeries(t, out, method="quasiclassical-quadrature")


@dataclass(frozen=True)
class TimeScales:
    t_beta: float
    t_phi: float
    t_G: float
    omega1: float
    delta_omega0: float
    anharmonicity_ratio: float

    def as_dict(self) -> dict:
        return dict(t_beta=self.t_beta, t_phi=self.t_phi, t_G=self.t_G, omega1=self.omega1,
                    delta_omega0=self.delta_omega0, anharmonicity_ratio=self.anharmonicity_ratio)


def time_scales(config: ValidatedConfig) -> TimeScales:
    """Anharmonic, coupling and Gaussian-decay time scales.

    Scales that do not exist (beta = 0, or zero force spread for t_phi)
    are returned as ``math.inf``.
    """
    osc = config.osc
    m, w0, b = osc.m, osc.omega0, osc.beta
    x0, p0 = config.initial_position, config.initial_momentum
    if config.coherent is not None:
        x0, p0 = config.coherent.x0, config.coherent.p0
    var = config.bec.force_variance
    H = float(classical_energy(x0, p0, 0.0, osc))
    ratio = osc.anharmonicity_ratio(x0)
    if b == 0:
        return TimeScales(math.inf, math.inf, math.inf, w0, 0.0, ratio)
    t_beta = 4 * m**2 * w0**2 / (3 * b * HBAR)
    t_phi = 4 * m**3 * w0**5 / (3 * b * var) if var > 0 else math.inf
    dw = 3 * b * HBAR / (4 * m**2 * w0**2) * H / (HBAR * w0)
    denom = H + m * w0**2 * x0**2 * t_beta / t_phi
    t_G = t_beta * math.sqrt(HBAR * w0 / denom) if denom > 0 else math.inf
    return TimeScales(t_beta, t_phi, t_G, w0 + dw, dw, ratio)


@dataclass(frozen=True)
class Prediction:
    values: np.ndarray
    valid: np.ndarray  # per-sample flag: the asymptotic regime holds


def short_time_prediction(config: ValidatedConfig, t,
                          fraction: float = SHORT_TIME_FRACTION) -> Prediction:
    """Gaussian-damped carrier, valid while t <= fraction * min(t_beta, t_phi)."""
    state = _coherent(config)
    osc = config.osc
    ts = time_scales(config)
    t = np.asarray(t, dtype=float)
    env = np.exp(-t**2 / (2 * ts.t_G**2)) if math.isfinite(ts.t_G) else np.ones_like(t)
    w1 = ts.omega1
    val = env * (state.x0 * np.cos(w1 * t) + state.p0 / (osc.m * osc.omega0) * np.sin(w1 * t))
    return Prediction(val, t <= fraction * min(ts.t_beta, ts.t_phi))


def long_time_amplitude(config: ValidatedConfig) -> float:
    """Prefactor K of the long-time law K (beta t)^(-5/2), per unit x0."""
    state = _coherent(config)
    osc = config.osc
    dphi = _spread(config)
    if not dphi > 0:
        raise errors.NonPositiveSpread("the long-time law needs a positive force spread")
    H = float(classical_energy(state.x0, state.p0, 0.0, osc))
    return (math.exp(-2 * H / (HBAR * osc.omega0)) * osc.m**5.5 * osc.omega0**6.5
            / (HBAR**2 * dphi) * 64 / (9 * math.sqrt(3)))


def long_time_prediction(config: ValidatedConfig, t,
                         factor: float = LONG_TIME_FACTOR) -> Prediction:
    """Algebraic (beta t)^(-5/2) tail on the bare w0 carrier.

    Valid for t >= factor * max(t_beta, t_phi).
    """
    state = _coherent(config)
    osc = config.osc
    ts = time_scales(config)
    t = np.asarray(t, dtype=float)
    K = long_time_amplitude(config)
    with np.errstate(divide="ignore"):
        env = K * (osc.beta * t) ** -2.5
    w0 = osc.omega0
    val = env * (state.x0 * np.cos(w0 * t) + state.p0 / (osc.m * w0) * np.sin(w0 * t))
    return Prediction(val, t >= factor * max(ts.t_beta, ts.t_phi))
