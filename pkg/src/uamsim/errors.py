"""Exception hierarchy shared by all uamsim modules."""


class UamSimError(Exception):
    """Base class for all domain errors raised by uamsim."""


class InvalidNode(UamSimError):
    """A node id is outside the graph's vertex set."""


class NoPath(UamSimError):
    """No route exists between the requested endpoints."""


class TooLarge(UamSimError):
    """Instance exceeds an exact solver's size guard."""


class Infeasible(UamSimError):
    """No feasible tour exists (a required arc is missing)."""


class EmptyCluster(UamSimError):
    """A cluster in a grouped-tour instance contains no nodes."""


class ConstructionError(UamSimError):
    """A transformation parameter violates its validity condition."""


class OutOfSpan(UamSimError):
    """A query time falls outside a flight profile's time span."""


class UnresolvableConflict(UamSimError):
    """All avoidance stages failed to clear a predicted conflict."""

    def __init__(self, message, tried=()):
        super().__init__(message)
        self.tried = tuple(tried)


class AliasedTarget(UamSimError):
    """A synthesized beat frequency exceeds the Nyquist limit."""


class InvalidDistance(UamSimError):
    """A propagation distance is non-positive or non-finite."""


class EmptyLinkList(UamSimError):
    """Availability composition needs at least one link."""


class MissingPosition(UamSimError):
    """A graph node used for flight kinematics has no coordinates."""


class ScenarioError(UamSimError):
    """A scenario file is structurally or semantically invalid."""
