"""Exception hierarchy.

Three branches matter operationally: configuration problems (bad model or
trade inputs, exit code 1 in the CLI), numerical failures (exit code 2),
and I/O errors (plain OSError, exit code 3).
"""

from __future__ import annotations

from dataclasses import dataclass


class XccyError(Exception):
    """Base class for all engine errors."""


class ConfigError(XccyError):
    """Invalid model, trade, or run configuration."""


class NumericalError(XccyError):
    """A numerical procedure failed to produce a usable result."""


@dataclass(frozen=True)
class Violation:
    """One validation finding, naming the offending field."""

    code: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} [{self.field}]: {self.message}"


class ModelValidationError(ConfigError):
    """Raised by model validation; carries the full list of violations."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


# model / curve inputs
class NegativeTime(ConfigError):
    pass


class UnknownCurrency(ConfigError):
    pass


class DomesticPairRequested(ConfigError):
    pass


# simulation inputs
class EmptyGrid(ConfigError):
    pass


class ZeroPaths(ConfigError):
    pass


# path functionals
class FlowOffGrid(ConfigError):
    pass


class GridMismatch(ConfigError):
    pass


class MissingCollateralRates(ConfigError):
    pass


# collateral
class NonPositiveFx(ConfigError):
    pass


class MissingRates(ConfigError):
    pass


class UnsupportedCombination(ConfigError):
    pass


# pricing
class EndogenousSpecPassed(ConfigError):
    pass


class ScenarioMeasureMismatch(ConfigError):
    pass


class AsymmetricCollateralRates(ConfigError):
    pass


# diagnostics
class UnknownProcessId(ConfigError):
    pass


# bsde
class PicardDivergence(NumericalError):
    pass


class SingularRegression(NumericalError):
    pass
