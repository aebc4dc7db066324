"""Exception types raised across the package."""


class ShiftInvError(Exception):
    """Base class for all errors raised by :mod:`shiftinv`."""


class NotLattice(ShiftInvError, ValueError):
    """An operation needing a lattice received the full space (or trivial group)."""


class NotSublattice(ShiftInvError, ValueError):
    """The first lattice is not contained in the second."""


class NotSuperGroup(ShiftInvError, ValueError):
    """Gamma does not contain the base lattice Lambda."""


class DimensionMismatch(ShiftInvError, ValueError):
    pass


class ZeroMatrix(ShiftInvError, ValueError):
    """A smallest nonzero eigenvalue was requested for a numerically zero matrix."""


class AlreadyMinimal(ShiftInvError, ValueError):
    """The generator set cannot be reduced: some fiber has full rank."""


class ConfigError(ShiftInvError, ValueError):
    """Invalid user configuration; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
