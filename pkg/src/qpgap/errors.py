"""Exception types shared across the package."""


class QpgapError(Exception):
    """Base class for all package-specific errors."""


class DomainError(QpgapError, ValueError):
    """An argument lies outside the physical domain of an operation."""


class BracketError(DomainError):
    """A root-finding bracket does not enclose a sign change."""


class UnderdeterminedError(DomainError):
    """Too few independent targets to determine the requested parameters."""


class NearResonanceError(DomainError):
    """A perturbative sum hits a near-resonant level pair."""


class GeometryError(QpgapError, ValueError):
    """A gap profile or fabrication stack is geometrically invalid."""


class CoverageError(QpgapError, ValueError):
    """A scan frequency grid does not cover the required band."""


class ConfigError(QpgapError, ValueError):
    """A configuration document is malformed or inconsistent."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConvergenceError(QpgapError, RuntimeError):
    """An iterative numerical routine exhausted its iteration budget.

    ``best`` carries the best iterate seen so far, when one exists.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class RankDeficiencyError(ConvergenceError):
    """The least-squares normal equations are singular."""
