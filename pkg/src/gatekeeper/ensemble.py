"""Weighted classical-force ensembles encoding the condensate back-action.

Every branch of the oscillator evolves under H + phi X for one constant force
phi; the reduced oscillator state is the weighted mixture of the branches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from . import errors

HBAR = 1.0


@dataclass(frozen=True)
class ForceEnsemble:
    forces: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        phi = np.array(self.forces, dtype=float).reshape(-1)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if phi.shape != w.shape or phi.size == 0:
            raise errors.ConfigError("an ensemble needs matching, non-empty forces and weights")
        if np.any(w <= 0):
            raise errors.ConfigError("ensemble weights must be positive")
        phi.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "forces", phi)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.forces.size

    def __iter__(self):
        return iter(zip(self.forces.tolist(), self.weights.tolist()))

    def moment(self, k: int) -> float:
        return float(np.sum(self.weights * self.forces**k))

    def mirrored(self) -> "ForceEnsemble":
        """The ensemble with every force reversed, phi -> -phi."""
        return ForceEnsemble(-self.forces, self.weights)


def discrete_ensemble(bec) -> ForceEnsemble:
    """Forces hbar*Omega1*(N - 2n) with binomial weights C(N, n)/2^N.

    These are the probabilities of the tunnelling eigenstates when all N atoms
    start in the left well.
    """
    if bec.mode != "discrete":
        raise errors.WrongMode("discrete_ensemble needs a discrete-mode condensate")
    N = int(bec.N)
    n = np.arange(N + 1)
    w = binom.pmf(n, N, 0.5)
    phi = HBAR * bec.omega1 * (N - 2 * n)
    keep = w > 0  # extreme tails underflow for very large N
    return ForceEnsemble(phi[keep], w[keep])


def continuum_density(delta_phi: float, phi):
    """Gaussian force density exp(-phi^2 / 2 dphi^2) / sqrt(2 pi dphi^2)."""
    if not delta_phi > 0:
        raise errors.NonPositiveSpread(f"delta_phi must be positive, got {delta_phi}")
    phi = np.asarray(phi, dtype=float)
    return np.exp(-phi**2 / (2 * delta_phi**2)) / math.sqrt(2 * math.pi * delta_phi**2)


def quadrature_ensemble(delta_phi: float, K: int) -> ForceEnsemble:
    """K-node Gauss-Hermite rule for the Gaussian force density.

    Exact for polynomial integrands of degree <= 2K - 1.  A zero spread
    collapses to the single uncoupled branch.
    """
    if delta_phi < 0:
        raise errors.NonPositiveSpread(f"delta_phi must be >= 0, got {delta_phi}")
    if K < 1:
        raise errors.ConfigError("K must be >= 1")
    if delta_phi == 0:
        return ForceEnsemble([0.0], [1.0])
    x, w = np.polynomial.hermite_e.hermegauss(K)
    # hermegauss nodes are symmetric up to rounding; mirror them exactly
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return ForceEnsemble(delta_phi * x, w / math.sqrt(2 * math.pi))


def trapezoid_ensemble(delta_phi: float, step: float, width: float = 8.0) -> ForceEnsemble:
    """Uniform-spacing rule on [-width*dphi, width*dphi].

    Unlike Gauss-Hermite, the node spacing is chosen directly, so it can be
    made fine enough to resolve the force-dependent phases of long runs.
    The rule converges geometrically for the Gaussian-weighted entire
    integrands that occur here.
    """
    if not delta_phi > 0:
        raise errors.NonPositiveSpread(f"delta_phi must be positive, got {delta_phi}")
    if not step > 0:
        raise errors.ConfigError("step must be positive")
    n = int(math.ceil(width * delta_phi / step))
    phi = step * np.arange(-n, n + 1)
    w = np.exp(-phi**2 / (2 * delta_phi**2))
    return ForceEnsemble(phi, w / w.sum())
