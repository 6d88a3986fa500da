"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: config problems -> 2,
admissibility/splitting violations -> 3, numerical failures -> 4.
"""


class ProjLabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ProjLabError):
    """Invalid or inconsistent experiment configuration."""


class AdmissibilityError(ProjLabError):
    """The perturbation map violates invertibility or determinant positivity."""


class SplittingError(ProjLabError):
    """The index set splits an eigenvalue (or a perturbed cluster escaped its gap)."""


class NumericalError(ProjLabError):
    """A solver, resolvent, or quadrature step failed or is under-resolved."""
