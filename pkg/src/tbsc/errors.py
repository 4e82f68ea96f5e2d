"""Exception hierarchy shared by all modules."""


class TBSCError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(TBSCError, ValueError):
    """Operands have incompatible shapes."""


class InconsistentSystemError(TBSCError):
    """A linear system reduced to 0 = 1."""


class DecodeError(TBSCError):
    """The stream decoder received contradictory data."""


class InfeasibleParametersError(TBSCError, ValueError):
    """Parameters fall outside the region where a construction exists."""


class ConstructionInvalidError(TBSCError):
    """A built code failed to meet its delay guarantee."""


class RelayCausalityError(TBSCError):
    """The relay tried to forward a source symbol it has not decoded yet."""


class InadmissibleScheduleError(TBSCError, ValueError):
    """An erasure schedule violates the burst channel model."""


class ScheduleSpaceTooLarge(TBSCError):
    """Exhaustive enumeration would exceed the configured guard."""
