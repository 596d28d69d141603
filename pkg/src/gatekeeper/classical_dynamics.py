"""Classical oracle: fixed-step RK4 for the forced quartic oscillator and the
harmonic-series solution with its exact first-harmonic frequency."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import errors
from .model import OscillatorParams

ENERGY_GATE = 1e-8   # relative drift allowed per 1000 steps


@dataclass(frozen=True)
class ClassicalTrajectory:
    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray
    force: float
    step: float


def total_energy(x, p, phi, osc: OscillatorParams):
    return (p**2 / (2 * osc.m) + 0.5 * osc.m * osc.omega0**2 * x**2
            + 0.25 * osc.beta * x**4 + phi * x)


def default_step(osc: OscillatorParams) -> float:
    return 1e-3 * 2 * math.pi / osc.omega0


def integrate(x0, p0, phi, osc: OscillatorParams, t_end: float,
              h: Optional[float] = None, times=None) -> ClassicalTrajectory:
    """Integrate dp/dt = -m w0^2 x - beta x^3 - phi, dx/dt = p/m with RK4.

    ``x0``, ``p0`` and ``phi`` may be arrays (broadcast together) to advance
    many independent trajectories at once.  Samples are taken at ``times``
    (default: every step up to ``t_end``); the last step before each sample
    is shortened to land on it exactly.  Raises StepTooLarge when the energy
    drift exceeds the gate.
    """
    if h is None:
        h = default_step(osc)
    if not h > 0 or not t_end > 0:
        raise ValueError("h and t_end must be positive")
    if times is None:
        n = int(math.ceil(t_end / h - 1e-9))
        times = np.minimum(h * np.arange(n + 1), t_end)
    times = np.asarray(times, dtype=float)
    x, p, phi = (a.astype(float) for a in np.broadcast_arrays(x0, p0, phi))
    x0, p0 = x.copy(), p.copy()
    m, k, b = osc.m, osc.m * osc.omega0**2, osc.beta

    def rhs(x, p):
        return p / m, -k * x - b * x**3 - phi

    xs = np.empty(times.shape + x.shape)
    ps = np.empty(times.shape + x.shape)
    t = 0.0
    steps = 0
    for i, target in enumerate(times):
        while target - t > 1e-12 * max(1.0, target):
            dt = min(h, target - t)
            k1x, k1p = rhs(x, p)
            k2x, k2p = rhs(x + 0.5 * dt * k1x, p + 0.5 * dt * k1p)
            k3x, k3p = rhs(x + 0.5 * dt * k2x, p + 0.5 * dt * k2p)
            k4x, k4p = rhs(x + dt * k3x, p + dt * k3p)
            x = x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
            p = p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
            t += dt
            steps += 1
        xs[i], ps[i] = x, p
    e = total_energy(xs, ps, phi, osc)
    e0 = total_energy(x0, p0, phi, osc)
    drift = np.max(np.abs(e - e0) / np.maximum(np.abs(e0), 1e-300))
    if drift > ENERGY_GATE * max(1.0, steps / 1000):
        raise errors.StepTooLarge(f"relative energy drift {drift:.3g} over {steps} steps")
    return ClassicalTrajectory(times, xs, ps, phi if phi.ndim else float(phi), float(h))


def upward_crossings(times, values) -> np.ndarray:
    """Linearly interpolated times where ``values`` crosses zero upwards."""
    v = np.asarray(values)
    i = np.nonzero((v[:-1] < 0) & (v[1:] >= 0))[0]
    t = np.asarray(times)
    return t[i] - v[i] * (t[i + 1] - t[i]) / (v[i + 1] - v[i])


def measured_period(traj: ClassicalTrajectory) -> float:
    """Mean spacing of successive turning points (upward zero crossings of p)."""
    tc = upward_crossings(traj.times, traj.momenta)
    if tc.size < 2:
        raise errors.TooFewPeaks("need at least two turning points to measure a period")
    return float((tc[-1] - tc[0]) / (tc.size - 1))


def appendix_frequency(x0: float, osc: OscillatorParams) -> float:
    """First-harmonic frequency of xdd = -w0^2 x - (beta/m) x^3 from rest at x0."""
    b, w0 = osc.beta / osc.m, osc.omega0
    w2 = (6 * b * x0**2 + 8 * w0**2
          + math.sqrt(30 * b**2 * x0**4 + 96 * b * x0**2 * w0**2 + 64 * w0**4)) / 16
    return math.sqrt(w2)


def appendix_solution(x0: float, osc: OscillatorParams, t):
    """Three-harmonic series solution started at rest from x0."""
    b = osc.beta / osc.m
    w = appendix_frequency(x0, osc)
    t = np.asarray(t, dtype=float)
    c1 = np.cos(w * t)
    return (x0 * c1 + b * x0**3 / (32 * w**2) * (np.cos(3 * w * t) - c1)
            + b**2 * x0**5 / (1024 * w**4) * (np.cos(5 * w * t) - c1))


def lindstedt_phase_error(x0: float, p0: float, phi: float, osc: OscillatorParams,
                          periods: int = 10, h: Optional[float] = None) -> float:
    """Phase lag (rad) between the Lindstedt branch and RK4 after ``periods`` periods.

    Both trajectories are sampled on the same grid and their turning points
    located by the same crossing detector.
    """
    from .quasiclassical import LindstedtTrajectory
    shift = phi / (osc.m * osc.omega0**2)
    T = 2 * math.pi / appendix_frequency(math.hypot(x0 + shift, p0 / (osc.m * osc.omega0)), osc)
    t_end = (periods + 1.5) * T
    traj = integrate(x0, p0, phi, osc, t_end, h)
    lind = LindstedtTrajectory.start(x0, p0, phi, osc)
    w1 = lind.omega1
    # momentum of the Lindstedt branch: m dX/dt
    p_lin = osc.m * w1 * (-(shift + x0) * np.sin(w1 * traj.times)
                          + p0 / (osc.m * osc.omega0) * np.cos(w1 * traj.times))
    tr = upward_crossings(traj.times, traj.momenta)
    tl = upward_crossings(traj.times, p_lin)
    n = min(periods, tr.size - 1, tl.size - 1)
    if n < 1:
        raise errors.TooFewPeaks("trajectory too short to compare phases")
    T_rk = (tr[n] - tr[0]) / n
    return float(2 * math.pi * abs((tl[n] - tl[0]) - (tr[n] - tr[0])) / T_rk)
