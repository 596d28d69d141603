"""Exact dynamics by diagonalising H + phi X in a truncated number basis.

Each force node is diagonalised once; any time is then evaluated from the
eigenbasis expansion, and the ensemble average is taken in node order so the
result does not depend on how many worker threads were used.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from . import errors
from .ensemble import ForceEnsemble
from .model import HBAR, OscillatorParams, ValidatedConfig

RESIDUAL_TOL = 1e-10
SYMMETRY_TOL = 1e-12
# Pairs whose coefficient is below this fraction of the largest one are dropped.
PAIR_TOL = 1e-15
EDGE_MARGIN = 15
_CHUNK = 1 << 21


@dataclass(frozen=True)
class SpectralBranch:
    force: float
    energies: np.ndarray
    vectors: np.ndarray

    @property
    def basis_size(self) -> int:
        return self.energies.size


@dataclass(frozen=True)
class DensityCoefficients:
    time: float
    matrix: np.ndarray

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    method: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape:
            raise ValueError("times and values differ in length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.times.size


def position_operator(osc: OscillatorParams, M: int) -> np.ndarray:
    off = math.sqrt(HBAR / (2 * osc.m * osc.omega0)) * np.sqrt(np.arange(1, M))
    return np.diag(off, 1) + np.diag(off, -1)


def build_hamiltonian(osc: OscillatorParams, phi: float, M: int) -> np.ndarray:
    """Matrix of H + phi X on the lowest M harmonic levels.

    Uses the exact ladder-algebra elements of X^4, so the band is 4 wide and
    no truncation error enters the retained block.
    """
    if M < 2:
        raise errors.BasisTooSmall(f"basis size must be >= 2, got {M}")
    n = np.arange(M, dtype=float)
    s2 = (HBAR / (2 * osc.m * osc.omega0)) ** 2
    H = np.diag(HBAR * osc.omega0 * (n + 0.5) + 0.25 * osc.beta * s2 * (6 * n**2 + 6 * n + 3))
    if M > 2:
        k = n[:-2]
        band2 = 0.25 * osc.beta * s2 * (4 * k + 6) * np.sqrt((k + 1) * (k + 2))
        H += np.diag(band2, 2) + np.diag(band2, -2)
    if M > 4:
        k = n[:-4]
        band4 = 0.25 * osc.beta * s2 * np.sqrt((k + 1) * (k + 2) * (k + 3) * (k + 4))
        H += np.diag(band4, 4) + np.diag(band4, -4)
    if phi:
        H += phi * position_operator(osc, M)
    return H


def eigendecompose(H: np.ndarray, force: float = 0.0) -> SpectralBranch:
    """Full ascending spectrum of a real symmetric matrix, residual-checked."""
    H = np.asarray(H, dtype=float)
    if np.max(np.abs(H - H.T), initial=0.0) > SYMMETRY_TOL * max(np.abs(H).max(initial=0.0), 1.0):
        raise ValueError("matrix is not symmetric")
    try:
        E, V = scipy.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise errors.NoConvergence(str(exc)) from exc
    norm = np.abs(E).max(initial=0.0)
    residual = np.linalg.norm(H @ V - V * E, axis=0).max(initial=0.0)
    if residual > RESIDUAL_TOL * max(norm, np.finfo(float).tiny):
        raise errors.NoConvergence(f"eigen residual {residual:.3g} exceeds tolerance")
    return SpectralBranch(force=force, energies=E, vectors=V)


def solve_branch(osc: OscillatorParams, phi: float, M: int) -> SpectralBranch:
    return eigendecompose(build_hamiltonian(osc, phi, M), force=phi)


def oscillatory_sum(t: np.ndarray, omega: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Evaluate sum_p F_p exp(i omega_p t) for each t.

    On uniform grids the phase is split as t = t_block + tau, which turns
    the sum into one matrix product per block set.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.size, dtype=complex)
    if omega.size == 0 or t.size == 0:
        return out
    n = t.size
    if n > 64:
        dt = (t[-1] - t[0]) / (n - 1)
        grid = t[0] + dt * np.arange(n)
        if np.max(np.abs(grid - t)) <= 1e-12 * max(1.0, abs(t[-1])):
            B = int(math.ceil(math.sqrt(n)))
            nb = int(math.ceil(n / B))
            tau = dt * np.arange(B)
            tb = t[0] + dt * B * np.arange(nb)
            inner = np.exp(1j * np.outer(tau, omega))           # B x P
            outer = np.exp(1j * np.outer(omega, tb)) * F[:, None]  # P x nb
            block = inner @ outer                               # B x nb
            return block.T.reshape(-1)[:n]
    rows = max(1, _CHUNK // max(omega.size, 1))
    for s in range(0, n, rows):
        out[s:s + rows] = np.exp(1j * np.outer(t[s:s + rows], omega)) @ F
    return out


@dataclass(frozen=True)
class BranchSummary:
    """What the mean-position sum needs from one force branch."""
    force: float
    weight: float
    stationary: float
    omega: np.ndarray   # E_i - E_j for the retained pairs i < j
    coeff: np.ndarray   # conj(a_i) a_j <i|X|j>

    def mean_position(self, t: np.ndarray) -> np.ndarray:
        return self.stationary + 2.0 * oscillatory_sum(t, self.omega, self.coeff).real


def _summarise(osc: OscillatorParams, c: np.ndarray, phi: float, w: float, M: int,
               X: np.ndarray) -> BranchSummary:
    br = solve_branch(osc, phi, M)
    V = br.vectors
    a = V.T @ c
    Xe = V.T @ X @ V
    F = np.conj(a)[:, None] * a[None, :] * Xe
    stationary = float(np.sum(np.abs(a) ** 2 * np.diag(Xe)))
    upper = np.triu(np.abs(F), 1)
    keep = np.nonzero(upper > PAIR_TOL * max(upper.max(initial=0.0), 1e-300))
    E = br.energies
    return BranchSummary(force=phi, weight=w, stationary=stationary,
                         omega=E[keep[0]] - E[keep[1]], coeff=F[keep])


def _padded_state(config: ValidatedConfig) -> np.ndarray:
    M = config.grid.basis_size
    c = np.zeros(M, dtype=complex)
    c[: config.state.coefficients.size] = config.state.coefficients
    return c


def check_truncation(config: ValidatedConfig, ensemble: ForceEnsemble) -> None:
    """Warn when a displaced branch could push population to the basis edge."""
    M = config.grid.basis_size
    c = config.state.coefficients
    occupied = np.nonzero(np.abs(c) ** 2 > 1e-14)[0]
    n_sup = int(occupied[-1]) if occupied.size else 0
    osc = config.osc
    shift = np.max(np.abs(ensemble.forces)) / (osc.m * osc.omega0**2)
    alpha = shift * math.sqrt(osc.m * osc.omega0 / (2 * HBAR))
    n_req = (math.sqrt(n_sup) + alpha) ** 2
    if n_sup > M - 5 or n_req + EDGE_MARGIN > M:
        warnings.warn(
            f"basis size {M} leaves fewer than {EDGE_MARGIN} levels above the estimated "
            f"branch occupation ({n_req:.1f})", errors.TruncationWarning, stacklevel=3)


def _default_workers() -> int:
    return min(4, os.cpu_count() or 1)


class EnsembleSpectrum:
    """Diagonalised force branches of one configuration."""

    def __init__(self, config: ValidatedConfig, ensemble: Optional[ForceEnsemble] = None,
                 workers: Optional[int] = None):
        self.config = config
        self.ensemble = config.ensemble if ensemble is None else ensemble
        check_truncation(config, self.ensemble)
        M = config.grid.basis_size
        c = _padded_state(config)
        X = position_operator(config.osc, M)
        jobs = list(self.ensemble)
        workers = _default_workers() if workers is None else workers

        def run(node):
            return _summarise(config.osc, c, node[0], node[1], M, X)

        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                self.branches = list(pool.map(run, jobs))
        else:
            self.branches = [run(j) for j in jobs]

    def mean_position(self, times=None) -> np.ndarray:
        t = self.config.times if times is None else np.asarray(times, dtype=float)
        total = np.zeros(t.size)
        for br in self.branches:   # node order keeps the reduction deterministic
            total += br.weight * br.mean_position(t)
        return total

    def stationary_value(self) -> float:
        return float(sum(br.weight * br.stationary for br in self.branches))


def mean_position(config: ValidatedConfig, ensemble: Optional[ForceEnsemble] = None,
                  times=None, workers: Optional[int] = None) -> TimeSeries:
    """Ensemble-averaged <X(t)> from the exact eigenbasis expansion."""
    spec = EnsembleSpectrum(config, ensemble, workers)
    t = config.times if times is None else np.asarray(times, dtype=float)
    return TimeSeries(t, spec.mean_position(t), method="spectral")


def stationary_value(config: ValidatedConfig, ensemble: Optional[ForceEnsemble] = None,
                     workers: Optional[int] = None) -> float:
    """Ensemble average of the time-independent (diagonal) part of <X(t)>."""
    return EnsembleSpectrum(config, ensemble, workers).stationary_value()


def branch_states(config: ValidatedConfig, t: float,
                  ensemble: Optional[ForceEnsemble] = None):
    """Yield (weight, psi_phi(t), branch) for every force node, in node order."""
    ens = config.ensemble if ensemble is None else ensemble
    M = config.grid.basis_size
    c = _padded_state(config)
    for phi, w in ens:
        br = solve_branch(config.osc, phi, M)
        V = br.vectors
        yield w, V @ (np.exp(-1j * br.energies * t / HBAR) * (V.T @ c)), br


def density_coefficients(config: ValidatedConfig, t: float,
                         ensemble: Optional[ForceEnsemble] = None) -> DensityCoefficients:
    """Ensemble-averaged c_nm(t) = sum_phi w_phi psi_phi(t)_n conj(psi_phi(t)_m)."""
    M = config.grid.basis_size
    rho = np.zeros((M, M), dtype=complex)
    for w, psi, _ in branch_states(config, t, ensemble):
        rho += w * np.outer(psi, np.conj(psi))
    return DensityCoefficients(time=float(t), matrix=rho)
