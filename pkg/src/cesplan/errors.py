"""Exception types shared across the package."""


class CesplanError(Exception):
    """Base class for all domain errors raised by this package."""


class NetworkError(CesplanError):
    """Invalid network topology or line data."""


class CycleDetected(NetworkError):
    """The line list contains a cycle; only radial networks are supported."""


class DisconnectedNode(NetworkError):
    """Some node is not reachable from the slack node."""


class NonPositiveImpedance(NetworkError):
    """A line has r <= 0 or x < 0."""


class DimensionMismatch(CesplanError):
    """An array argument does not match the expected shape."""


class ParseError(CesplanError):
    """An input file could not be parsed."""


class LengthMismatch(CesplanError):
    """A time series does not match the horizon length."""


class UnknownNode(CesplanError):
    """A customer references a node that does not exist in the network."""


class NegativeLoadOrPv(CesplanError):
    """Load or PV series contain negative values."""


class OutOfRange(CesplanError):
    """A time index lies outside the horizon."""


class SlackLocation(CesplanError):
    """The storage unit cannot be placed at the slack node."""


class InfeasibleBoxes(CesplanError):
    """Sizing bounds are empty (min above max)."""


class NonReciprocal(CesplanError):
    """A pairwise comparison matrix violates reciprocity or the Saaty scale."""


class DegenerateSpan(CesplanError):
    """All objectives have coincident utopia and nadir values."""


class AllLocationsInfeasible(CesplanError):
    """No candidate location admits a feasible storage schedule."""


class InconsistentJudgments(UserWarning):
    """Pairwise comparisons exceed the accepted consistency ratio (0.1)."""


class SolveFailed(CesplanError):
    """A QP solve for one candidate ended without an optimal status."""
