"""Decoherence of a quartic oscillator whose position is monitored by a
condensate in a symmetric double well."""

__version__ = "0.1.0"
