"""Exception types shared across the package."""


class LpSubspaceError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(LpSubspaceError):
    """Operand shapes are incompatible (ambient or subspace dimension)."""


class RankDeficient(LpSubspaceError):
    """A matrix expected to have full column rank does not."""

    def __init__(self, numerical_rank, expected):
        self.numerical_rank = numerical_rank
        self.expected = expected
        super().__init__(
            f"matrix has numerical rank {numerical_rank}, expected {expected}"
        )


class GeodesicNotUnique(LpSubspaceError):
    """Largest principal angle is pi/2: several geodesics connect the pair."""


class InvalidNoise(LpSubspaceError):
    """Noise level must be strictly positive for the cylinder sampler."""


class InvalidArgument(LpSubspaceError):
    """An argument violates a documented precondition."""


class SingularPoint(LpSubspaceError):
    """Point lies on the subspace where the operator requires dist > 0."""


class NonsmoothPoint(LpSubspaceError):
    """Requested an exact derivative at a configuration where it does not exist."""


class ConfigRejected(LpSubspaceError):
    """Experiment configuration violates a validity condition.

    The message names the violated inequality.
    """
