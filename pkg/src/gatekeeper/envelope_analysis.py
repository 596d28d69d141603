"""Envelope extraction by peak picking and the two decay-law fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import stats

from . import errors
from .spectral import TimeSeries

MIN_PERIODS = 5


@dataclass(frozen=True)
class EnvelopeFit:
    model: str
    params: Dict[str, float]
    window: Tuple[float, float]
    residual: float
    stderr: float = math.nan
    n_points: int = 0

    def as_dict(self) -> dict:
        return {"model": self.model, **self.params, "window": list(self.window),
                "residual": self.residual, "stderr": self.stderr, "n_points": self.n_points}


def _crossings(t, y) -> np.ndarray:
    s = np.signbit(y)
    i = np.nonzero(s[:-1] != s[1:])[0]
    return t[i] - y[i] * (t[i + 1] - t[i]) / (y[i + 1] - y[i])


def carrier_frequency(series: TimeSeries, baseline: float = 0.0) -> float:
    """Mean angular frequency from zero crossings of value - baseline."""
    tc = _crossings(series.times, series.values - baseline)
    if tc.size < 3:
        raise errors.TooFewPeaks("fewer than two half periods in the series")
    return float(math.pi * (tc.size - 1) / (tc[-1] - tc[0]))


def extract_envelope(series: TimeSeries, baseline: float = 0.0) -> TimeSeries:
    """Local maxima of |value - baseline| with parabolic refinement."""
    t = series.times
    y = np.abs(series.values - baseline)
    tc = _crossings(t, series.values - baseline)
    if tc.size < 2 * MIN_PERIODS:
        raise errors.TooFewPeaks(f"series spans {tc.size / 2:.1f} periods, need {MIN_PERIODS}")
    i = np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2 * y1 + y2
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(denom != 0, 0.5 * (y0 - y2) / denom, 0.0)
    # vertex of the parabola through three points; grid assumed locally uniform
    h = 0.5 * (t[i + 1] - t[i - 1])
    tp = t[i] + u * h
    yp = y1 - 0.25 * (y0 - y2) * u
    return TimeSeries(tp, yp, method="envelope")


def _window(env: TimeSeries, window) -> Tuple[np.ndarray, np.ndarray, Tuple[float, float]]:
    lo, hi = (float(env.times[0]), float(env.times[-1])) if window is None else map(float, window)
    sel = (env.times >= lo) & (env.times <= hi)
    if not np.any(sel):
        raise ValueError(f"fit window [{lo}, {hi}] contains no envelope points")
    t, v = env.times[sel], env.values[sel]
    if np.any(v <= 0):
        raise errors.NonPositiveEnvelope("envelope must be positive inside the fit window")
    return t, v, (lo, hi)


def _regress(x, y):
    if x.size < 2:
        raise ValueError("fit window needs at least two envelope points")
    if x.size == 2:
        slope = (y[1] - y[0]) / (x[1] - x[0])
        return slope, y[0] - slope * x[0], math.nan, 0.0
    r = stats.linregress(x, y)
    resid = y - (r.intercept + r.slope * x)
    return r.slope, r.intercept, r.stderr, float(np.linalg.norm(resid))


def fit_gaussian(envelope: TimeSeries, window=None) -> EnvelopeFit:
    """Fit log(env) = c - t^2 / (2 t_G^2); t_G is inf for a non-decaying envelope."""
    t, v, win = _window(envelope, window)
    slope, intercept, se, res = _regress(t**2, np.log(v))
    t_g = math.sqrt(-0.5 / slope) if slope < 0 else math.inf
    return EnvelopeFit("gaussian", {"t_G": t_g, "amplitude": math.exp(intercept)},
                       win, res, se, t.size)


def fit_powerlaw(envelope: TimeSeries, window=None) -> EnvelopeFit:
    """Fit log(env) = log(prefactor) + exponent * log(t); stderr is that of the exponent."""
    t, v, win = _window(envelope, window)
    if np.any(t <= 0):
        raise ValueError("power-law window must have strictly positive times")
    slope, intercept, se, res = _regress(np.log(t), np.log(v))
    return EnvelopeFit("powerlaw", {"exponent": float(slope), "prefactor": math.exp(intercept)},
                       win, res, se, t.size)


FITTERS = {"gaussian": fit_gaussian, "powerlaw": fit_powerlaw}


def late_window_mean(series: TimeSeries, fraction: float = 0.25) -> float:
    """Mean of the last ``fraction`` of the series, the fallback baseline."""
    n = max(1, int(series.values.size * fraction))
    return float(np.mean(series.values[-n:]))
