"""Exception types shared across the library."""


class NegcurveError(Exception):
    """Base class for library-specific errors."""


class ZeroInputError(NegcurveError, ValueError):
    """Projection (or another operation) is undefined for a zero input,
    e.g. projecting the origin onto a sphere."""


class NumericalError(NegcurveError, RuntimeError):
    """A numerical routine failed to produce a usable result
    (SVD breakdown, Newton projection stall, ...)."""


class RankDeficiencyError(NumericalError):
    """The constraint Jacobian lost full column rank at the evaluation
    point, so tangent projection / multipliers are not well defined."""


class InvalidConstantsError(NegcurveError, ValueError):
    """Lipschitz/bound constants are missing, empty, or out of range."""


class AsymmetryError(NegcurveError, ValueError):
    """A matrix that must be symmetric is not."""


class InvalidWeightsError(NegcurveError, ValueError):
    """A weight matrix violates the max-cut requirements
    (asymmetric, negative entries, or nonzero diagonal)."""


class ConfigError(NegcurveError, ValueError):
    """A run configuration file is missing, unparseable, or inconsistent."""
