"""Wigner functions in the harmonic number basis.

For rho = sum c_nm |n><m| the Wigner function is sum c_nm w_nm(x, p), with
w_nm a Gaussian times a generalised Laguerre polynomial in the dimensionless
phase-space variable

    z = x sqrt(m w0 / hbar) + i p / sqrt(m hbar w0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from . import errors
from .model import HBAR, OscillatorParams

NORMALIZATION_TOL = 1e-4
DEFAULT_POINTS = 201
RADII = 6.0


def laguerre(n: int, a: float, x):
    """Generalised Laguerre polynomial L_n^a(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("order must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + a - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def phase_variable(x, p, osc: OscillatorParams):
    return (np.asarray(x) * math.sqrt(osc.m * osc.omega0 / HBAR)
            + 1j * np.asarray(p) / math.sqrt(osc.m * HBAR * osc.omega0))


def wigner_kernel(n: int, m: int, x, p, osc: OscillatorParams):
    """Wigner transform w_nm(x, p) of |n><m|; w_mn = conj(w_nm).

    Phase convention: for n <= m the kernel carries z**(m - n), which is what
    the defining integral over <x - q/2|n><m|x + q/2> produces.
    """
    if n < 0 or m < 0:
        raise ValueError("levels must be non-negative")
    z = phase_variable(x, p, osc)
    lo, d = min(n, m), abs(m - n)
    r2 = np.abs(z) ** 2
    log_pref = 0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1) + d * math.log(2.0))
    w = ((-1) ** lo / (math.pi * HBAR)) * np.exp(log_pref - r2) * laguerre(lo, d, 2 * r2)
    if d:
        w = w * (z if n <= m else np.conj(z)) ** d
    return w


@dataclass(frozen=True)
class GridSpec:
    x: np.ndarray
    p: np.ndarray

    @classmethod
    def square(cls, half_width: float, osc: OscillatorParams, nx: int = DEFAULT_POINTS,
               np_: Optional[int] = None, center=(0.0, 0.0)) -> "GridSpec":
        """``nx`` x ``np_`` grid over [-L, L] in x and [-m w0 L, m w0 L] in p."""
        np_ = nx if np_ is None else np_
        pw = osc.m * osc.omega0 * half_width
        return cls(center[0] + np.linspace(-half_width, half_width, nx),
                   center[1] + np.linspace(-pw, pw, np_))


def default_half_width(osc: OscillatorParams, x0: float, p0: float) -> float:
    return RADII * max(osc.length_scale, abs(x0) + abs(p0) / (osc.m * osc.omega0))


def default_grid(osc: OscillatorParams, x0: float, p0: float,
                 nx: int = DEFAULT_POINTS, np_: Optional[int] = None) -> GridSpec:
    return GridSpec.square(default_half_width(osc, x0, p0), osc, nx, np_)


@dataclass(frozen=True)
class PhaseSpaceGrid:
    x: np.ndarray
    p: np.ndarray
    W: np.ndarray      # W[i, j] = W(x[i], p[j])
    time: float

    @property
    def cell(self) -> float:
        return _spacing(self.x) * _spacing(self.p)

    def normalization(self) -> float:
        return float(self.W.sum() * self.cell)

    def marginal_x(self) -> np.ndarray:
        return self.W.sum(axis=1) * _spacing(self.p)


def _spacing(v: np.ndarray) -> float:
    return float(v[1] - v[0]) if v.size > 1 else 1.0


def _occupied_size(rho: np.ndarray, tol: float = 1e-14) -> int:
    d = np.abs(np.diag(rho))
    tail = np.cumsum(d[::-1])[::-1]
    idx = np.nonzero(tail > tol)[0]
    return int(idx[-1]) + 1 if idx.size else 1


def render(coeffs, grid: GridSpec, osc: OscillatorParams,
           tol: float = NORMALIZATION_TOL, check: bool = True) -> PhaseSpaceGrid:
    """Evaluate W = sum_nm c_nm w_nm on ``grid``.

    ``coeffs`` is a DensityCoefficients-like object (``.matrix``, ``.time``)
    or a bare matrix.  Raises GridTooCoarse when the grid sum misses the
    trace by more than ``tol``.
    """
    rho = np.asarray(getattr(coeffs, "matrix", coeffs))
    t = float(getattr(coeffs, "time", 0.0))
    N = _occupied_size(rho)
    X, P = np.meshgrid(grid.x, grid.p, indexing="ij")
    z = phase_variable(X, P, osc)
    r2 = np.abs(z) ** 2
    u = 2 * r2
    gauss = np.exp(-r2) / (math.pi * HBAR)
    W = np.zeros(X.shape, dtype=float)
    envelope = gauss.astype(complex)     # z^d exp(-|z|^2) / (pi hbar)
    for d in range(N):
        # kernels w_{n, n+d}, n = 0 .. N-1-d, Laguerre recurrence in n
        prev, cur = None, np.ones_like(u)
        acc = np.zeros(X.shape, dtype=complex)
        for n in range(N - d):
            if n == 1:
                prev, cur = cur, 1.0 + d - u
            elif n > 1:
                prev, cur = cur, ((2 * n - 1 + d - u) * cur - (n - 1 + d) * prev) / n
            pref = (-1) ** n * math.exp(
                0.5 * (gammaln(n + 1) - gammaln(n + d + 1) + d * math.log(2.0)))
            acc += (rho[n, n + d] * pref) * cur
        term = (acc * envelope).real
        W += term if d == 0 else 2.0 * term
        envelope = envelope * z
    out = PhaseSpaceGrid(x=np.asarray(grid.x, float), p=np.asarray(grid.p, float), W=W, time=t)
    if check:
        expected = float(np.trace(rho).real)
        got = out.normalization()
        if not abs(got - expected) <= tol:
            raise errors.GridTooCoarse(
                f"grid normalisation {got:.6g} differs from trace {expected:.6g} by more than {tol:g}")
    return out


def trace_pairing(a: PhaseSpaceGrid, b: PhaseSpaceGrid) -> float:
    """2 pi hbar * integral W_a W_b dx dp, which approximates Tr[rho_a rho_b]."""
    return float(2 * math.pi * HBAR * np.sum(a.W * b.W) * a.cell)
