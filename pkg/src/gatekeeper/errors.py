"""Exception and warning types shared across the engines.

Configuration problems subclass :class:`ConfigError`; failures of a numerical
engine subclass :class:`NumericalError`.  The CLI maps the two families onto
exit codes 2 and 3.
"""


class GatekeeperError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(GatekeeperError, ValueError):
    pass


class NonPositiveMass(ConfigError):
    pass


class NonPositiveFrequency(ConfigError):
    pass


class NegativeBeta(ConfigError):
    pass


class UnnormalizedState(ConfigError):
    pass


class EmptyTimeGrid(ConfigError):
    pass


class BasisTooSmall(ConfigError):
    pass


class WrongMode(ConfigError):
    pass


class NonPositiveSpread(ConfigError):
    pass


class NonCoherentState(ConfigError):
    pass


class NotTwoLevel(ConfigError):
    pass


class NumericalError(GatekeeperError, ArithmeticError):
    pass


class NoConvergence(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class SingularGaussian(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass


class TooFewPeaks(NumericalError):
    pass


class NonPositiveEnvelope(NumericalError):
    pass


class TruncationWarning(UserWarning):
    """The basis edge is close to the occupied levels of some force branch."""


class AnharmonicityWarning(UserWarning):
    """A perturbative formula is used outside its small-anharmonicity regime."""
