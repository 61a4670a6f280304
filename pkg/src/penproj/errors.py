"""Exception types shared across the library."""


class PenProjError(Exception):
    """Base class for all library errors."""


class InvalidSpec(PenProjError):
    """A custom domain specification violates a structural invariant."""


class OutOfBounds(PenProjError):
    """Multi-index outside the grid."""


class EmptyRegion(PenProjError):
    """Requested projector over a region with no points."""


class InvalidNeighborSets(PenProjError):
    """Neighbor sets do not form disjoint two-point swaps."""


class InvalidPairs(PenProjError):
    """Interface pairs are not disjoint transpositions (or gamma != 1)."""


class ComplexCoefficients(PenProjError):
    """Robin coefficients must be real for a Hermitian penalty term."""


class DimMismatch(PenProjError):
    """Vector length does not match the operator dimension."""


class NonIdempotent(PenProjError):
    """Exact exponential requested for a non-idempotent (Robin) combination."""


class NoConvergence(PenProjError):
    """Power iteration failed to converge within the iteration budget."""


class InvalidRegimeInputs(PenProjError):
    """Penalty inputs inconsistent with the requested regime."""


class DivisionByZero(PenProjError):
    """A smoothness-factor ratio is undefined for the given inputs."""


class UnsupportedSupport(PenProjError):
    """Boundary data is non-zero outside the constrained region."""


class NonFinite(PenProjError):
    """NaN/Inf encountered during time stepping."""


class StepSizeUnderflow(PenProjError):
    """Adaptive step size shrank below the representable range."""


class DegenerateInput(PenProjError):
    """Not enough distinct data for a fit."""


class GridMismatch(PenProjError):
    """Trajectories are not on the same time grid."""


class QuadratureUnderResolved(PenProjError):
    """Response quadrature grid too coarse for the oscillation rate."""


class TooManyQubits(PenProjError):
    """Register layout exceeds the emulator guard."""


class NonCommutingRobin(PenProjError):
    """Robin value points and swap targets overlap; product form invalid."""


class ZeroOverlap(PenProjError):
    """Post-selection target component is numerically zero."""


class InvalidBeta(PenProjError):
    """LCHS kernel parameter outside (0, 1]."""
