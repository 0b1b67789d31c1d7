"""Exception hierarchy shared across the package.

Each class maps onto one CLI exit code so batch scripts can branch on
failure category without parsing messages.
"""


class SimulationError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1
    category = "error"


class ConfigError(SimulationError):
    """Malformed or inconsistent experiment configuration."""

    exit_code = 2
    category = "config"


class SingularityError(SimulationError):
    """A spectral weight is undefined on an eigenvalue inside the guard window."""

    exit_code = 3
    category = "singularity"


class DomainError(SimulationError):
    """Input outside the numerical domain: bad dimensions, non-Hermitian
    operators, unnormalized states, and similar contract violations."""

    exit_code = 4
    category = "domain"
