"""Exception types shared across the solver."""


class CubeqError(Exception):
    """Base class for every error raised by this package."""


class NonFiniteValue(CubeqError):
    """A problem callback produced NaN or Inf."""


class UnknownProblem(CubeqError):
    """Requested catalog problem does not exist."""


class RankDeficient(CubeqError):
    """Constraint Jacobian is numerically rank deficient (LICQ violated)."""


class ResidualConditionUnmet(CubeqError):
    """An inexact subproblem solve failed its residual certificate."""


class SecularSolveFailed(CubeqError):
    """Scalar root find for the cubic subproblem did not converge."""


class NonpositivePredictedReduction(CubeqError):
    """Model predicted no reduction at a non-stationary point (implementation bug)."""


class ConfigError(CubeqError):
    """Solver configuration violates a required parameter ordering."""


class InsufficientHistory(CubeqError):
    """Not enough accepted iterates to estimate a convergence rate."""


class TraceError(CubeqError):
    """Trace file is malformed or truncated."""
