"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class EvaluationError(ArithmeticError):
    """A function evaluated to a non-finite value.

    Parameters
    ----------
    message : str
        Human-readable description.
    node : float or complex, optional
        The abscissa at which the bad value appeared.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ConvergenceError(ArithmeticError):
    """A quadrature, tail estimate or iteration failed to converge."""


class PositivityError(ValueError):
    """A memory kernel implies a negative coupling strength (gain medium)."""


class DivergenceError(ArithmeticError):
    """A time integration grew without bound."""


class ResonanceError(ArithmeticError):
    """An undamped resonance was hit on a quadrature node."""


class BlowUpError(ArithmeticError):
    """The lattice simulation produced a non-finite value.

    Attributes
    ----------
    site : tuple
        Array index of the first offending entry.
    time : float
        Simulation time at which it appeared.
    """

    def __init__(self, message, site=None, time=None):
        super().__init__(message)
        self.site = site
        self.time = time


class ConfigError(ValueError):
    """Invalid run configuration, with the offending line when known."""

    def __init__(self, message, line=None, key=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.key = key


class EdgeSingularityError(DomainError):
    """Evaluation exactly at an integrable endpoint singularity."""
