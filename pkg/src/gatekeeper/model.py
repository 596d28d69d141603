"""Physical parameters, initial states and validated run configurations.

Atomic units with hbar = 1 are used throughout.  The oscillator Hamiltonian is

    H = P^2/2m + m w0^2 X^2/2 + beta X^4/4

and the condensate acts on it only through a family of constant forces phi,
so the condensate is described by the parameters that generate that family.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from . import errors
from .ensemble import ForceEnsemble, discrete_ensemble, quadrature_ensemble, trapezoid_ensemble

HBAR = 1.0
DEFAULT_BASIS_SIZE = 120
DEFAULT_QUAD_NODES = 40
DEFAULT_ANHARMONICITY_THRESHOLD = 0.3
NORM_TOL = 1e-12
TAIL_MASS = 1e-12


@dataclass(frozen=True)
class OscillatorParams:
    omega0: float
    beta: float = 0.0
    m: float = 1.0

    def validate(self) -> None:
        if not self.m > 0:
            raise errors.NonPositiveMass(f"mass must be positive, got {self.m}")
        if not self.omega0 > 0:
            raise errors.NonPositiveFrequency(f"omega0 must be positive, got {self.omega0}")
        if not self.beta >= 0:
            raise errors.NegativeBeta(f"beta must be non-negative, got {self.beta}")

    @property
    def length_scale(self) -> float:
        """Ground-state width sqrt(hbar / m w0)."""
        return math.sqrt(HBAR / (self.m * self.omega0))

    def anharmonicity_ratio(self, x_ref: float) -> float:
        """beta x_ref^2 / (m w0^2): quartic over quadratic force at ``x_ref``."""
        return self.beta * x_ref**2 / (self.m * self.omega0**2)

    def check_anharmonicity(self, x_ref: float,
                            threshold: float = DEFAULT_ANHARMONICITY_THRESHOLD) -> float:
        r = self.anharmonicity_ratio(x_ref)
        if r > threshold:
            warnings.warn(
                f"anharmonicity ratio {r:.3g} exceeds {threshold:g}; "
                "first-order frequency corrections are unreliable",
                errors.AnharmonicityWarning, stacklevel=2)
        return r


@dataclass(frozen=True)
class CondensateParams:
    """Condensate description.

    ``mode='discrete'`` uses ``N`` atoms with per-atom coupling ``omega1``,
    giving forces hbar*omega1*(N - 2n).  ``mode='continuum'`` uses the
    Gaussian force distribution of width ``delta_phi``.  ``omega0_coupling``
    is the constant part of the tunnelling coupling; it shifts every branch
    by a constant energy and never reaches the position dynamics.
    """
    mode: str = "continuum"
    delta_phi: float = 0.0
    N: Optional[int] = None
    omega1: Optional[float] = None
    omega0_coupling: float = 0.0

    def validate(self) -> None:
        if self.mode == "discrete":
            if self.N is None or int(self.N) != self.N or self.N < 1:
                raise errors.ConfigError(f"discrete mode needs a positive integer N, got {self.N}")
            if self.omega1 is None:
                raise errors.ConfigError("discrete mode needs omega1")
        elif self.mode == "continuum":
            if not self.delta_phi >= 0:
                raise errors.NonPositiveSpread(f"delta_phi must be >= 0, got {self.delta_phi}")
        else:
            raise errors.WrongMode(f"unknown condensate mode {self.mode!r}")

    @property
    def force_variance(self) -> float:
        if self.mode == "discrete":
            return self.N * (HBAR * self.omega1) ** 2
        return self.delta_phi**2


def delta_phi_from_kappa(kappa: float, osc: OscillatorParams) -> float:
    """Force spread from the current parameter: delta_phi^2 = 2 m hbar w0 kappa^2."""
    return math.sqrt(2.0 * osc.m * HBAR * osc.omega0) * abs(kappa)


@dataclass(frozen=True)
class Coherent:
    x0: float
    p0: float = 0.0


@dataclass(frozen=True)
class NumberBasis:
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def n_max(self) -> int:
        return len(self.coefficients) - 1


StateSpec = Union[Coherent, NumberBasis]


def coherent_amplitude(state: Coherent, osc: OscillatorParams) -> complex:
    return (state.x0 * math.sqrt(osc.m * osc.omega0 / (2 * HBAR))
            + 1j * state.p0 / math.sqrt(2 * osc.m * HBAR * osc.omega0))


def coherent_to_number_basis(state: Coherent, osc: OscillatorParams,
                             tail: float = TAIL_MASS) -> NumberBasis:
    """Expand a coherent state in the w0 number basis, dropping a tail of mass < ``tail``."""
    alpha = coherent_amplitude(state, osc)
    mean = abs(alpha) ** 2
    n_max = 0
    while poisson.sf(n_max, mean) >= tail:
        n_max += 1
    n = np.arange(n_max + 1)
    if alpha == 0:
        c = (n == 0).astype(complex)
    else:
        log_mod = -0.5 * mean + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        c = np.exp(log_mod) * np.exp(1j * n * np.angle(alpha))
    return NumberBasis(c)


def _ladder_expectation(c: np.ndarray) -> complex:
    # <a> = sum_n conj(c_n) c_{n+1} sqrt(n+1)
    n = np.arange(1, len(c))
    return complex(np.sum(np.conj(c[:-1]) * c[1:] * np.sqrt(n)))


def position_mean(state: NumberBasis, osc: OscillatorParams) -> float:
    a = _ladder_expectation(state.coefficients)
    return math.sqrt(2 * HBAR / (osc.m * osc.omega0)) * a.real


def momentum_mean(state: NumberBasis, osc: OscillatorParams) -> float:
    a = _ladder_expectation(state.coefficients)
    return math.sqrt(2 * HBAR * osc.m * osc.omega0) * a.imag


@dataclass(frozen=True)
class SimulationGrid:
    """Sample times and discretisation sizes.

    ``quad_rule`` selects the continuum force quadrature: ``gauss-hermite``
    with ``quad_nodes`` nodes, or ``trapezoid`` with spacing ``quad_step``
    (needed for long windows where the phase spread across forces outgrows
    the Gauss-Hermite node spacing).
    """
    times: np.ndarray
    basis_size: int = DEFAULT_BASIS_SIZE
    quad_nodes: int = DEFAULT_QUAD_NODES
    quad_rule: str = "gauss-hermite"
    quad_step: Optional[float] = None

    def __post_init__(self):
        t = np.array(self.times, dtype=float).reshape(-1)
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, t_max: float, n_samples: int, **kw) -> "SimulationGrid":
        return cls(np.linspace(0.0, t_max, n_samples), **kw)

    def validate(self, n_max: int) -> None:
        t = self.times
        if t.size == 0:
            raise errors.EmptyTimeGrid("time grid is empty")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise errors.ConfigError("times must be strictly increasing")
        if self.basis_size < n_max + 10:
            raise errors.BasisTooSmall(
                f"basis size {self.basis_size} must be at least n_max + 10 = {n_max + 10}")
        if self.quad_nodes < 1:
            raise errors.ConfigError("quad_nodes must be >= 1")
        if self.quad_rule not in ("gauss-hermite", "trapezoid"):
            raise errors.ConfigError(f"unknown quadrature rule {self.quad_rule!r}")
        if self.quad_rule == "trapezoid" and not (self.quad_step and self.quad_step > 0):
            raise errors.ConfigError("trapezoid rule needs a positive quad_step")


@dataclass(frozen=True)
class ValidatedConfig:
    osc: OscillatorParams
    bec: CondensateParams
    state: NumberBasis
    grid: SimulationGrid
    ensemble: ForceEnsemble
    coherent: Optional[Coherent] = None
    anharmonicity_threshold: float = DEFAULT_ANHARMONICITY_THRESHOLD
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def initial_position(self) -> float:
        return position_mean(self.state, self.osc)

    @property
    def initial_momentum(self) -> float:
        return momentum_mean(self.state, self.osc)

    def with_grid(self, **changes) -> "ValidatedConfig":
        """Re-validate with some grid fields replaced (e.g. ``times=...``, ``quad_nodes=...``)."""
        g = self.grid
        fields = dict(times=g.times, basis_size=g.basis_size, quad_nodes=g.quad_nodes,
                      quad_rule=g.quad_rule, quad_step=g.quad_step)
        fields.update(changes)
        state = self.coherent if self.coherent is not None else self.state
        return validate(self.osc, self.bec, state, SimulationGrid(**fields),
                        anharmonicity_threshold=self.anharmonicity_threshold)


def build_ensemble(bec: CondensateParams, grid: SimulationGrid) -> ForceEnsemble:
    if bec.mode == "discrete":
        return discrete_ensemble(bec)
    if grid.quad_rule == "trapezoid" and bec.delta_phi > 0:
        return trapezoid_ensemble(bec.delta_phi, grid.quad_step)
    return quadrature_ensemble(bec.delta_phi, grid.quad_nodes)


def validate(osc: OscillatorParams, bec: CondensateParams, state: StateSpec,
             grid: SimulationGrid,
             anharmonicity_threshold: float = DEFAULT_ANHARMONICITY_THRESHOLD) -> ValidatedConfig:
    """Check every input and return the normalised configuration.

    Coherent states are expanded in the number basis and the force ensemble
    is materialised.  Raises a :class:`~gatekeeper.errors.ConfigError`
    subclass on the first invalid field.
    """
    osc.validate()
    bec.validate()
    coherent = None
    if isinstance(state, Coherent):
        coherent = state
        basis_state = coherent_to_number_basis(state, osc)
    elif isinstance(state, NumberBasis):
        basis_state = state
        norm = float(np.sum(np.abs(state.coefficients) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise errors.UnnormalizedState(f"sum |c_n|^2 = {norm!r}, expected 1")
    else:
        raise errors.ConfigError(f"unsupported state {state!r}")
    grid.validate(basis_state.n_max)
    ensemble = build_ensemble(bec, grid)
    return ValidatedConfig(osc=osc, bec=bec, state=basis_state, grid=grid,
                           ensemble=ensemble, coherent=coherent,
                           anharmonicity_threshold=anharmonicity_threshold)
