"""Exception hierarchy shared by every vortexlab module."""

from __future__ import annotations


class VortexLabError(Exception):
    """Base class for all vortexlab errors."""


class DomainError(VortexLabError, ValueError):
    """A point lies outside the domain (or outside the closed unit disk)."""


class InversionError(DomainError):
    """Newton inversion of the conformal map did not converge inside the disk."""


class SingularityError(VortexLabError, ValueError):
    """Evaluation at the singular diagonal of the Green's function."""


class PreconditionError(VortexLabError, ValueError):
    """An operation was called outside its documented preconditions."""


class SearchFailed(VortexLabError):
    """No stationary point converged from any seed."""


class PhysicalEvent(VortexLabError):
    """A simulation stopped because the dynamics left their domain of definition.

    ``time`` is the simulation time at which the event was detected.
    """

    def __init__(self, message: str, time: float) -> None:
        super().__init__(f"{message} at t={time:.17g}")
        self.time = time


class BoundaryCollision(PhysicalEvent):
    pass


class VortexCollapse(PhysicalEvent):
    pass
