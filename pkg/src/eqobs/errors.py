"""Exception hierarchy shared by every eqobs module."""


class EqobsError(Exception):
    """Base class for all library errors."""


class UsageError(EqobsError, ValueError):
    """Incompatible arguments: mismatched groups, manifolds or dimensions."""


class GroupMismatchError(UsageError):
    pass


class BranchCutError(EqobsError, ValueError):
    """Matrix logarithm requested at or too close to the principal branch cut."""


class AlgebraConsistencyError(EqobsError, ArithmeticError):
    """A matrix that should lie in the Lie algebra left the span of the basis."""


class TransitivityError(EqobsError, ArithmeticError):
    """The infinitesimal action is rank deficient at the requested point."""


class UnsupportedError(EqobsError, NotImplementedError):
    pass


class StabilizerCompatibilityError(EqobsError, ValueError):
    """An origin lift fails the stabilizer compatibility condition.

    ``witness`` holds the offending ``(S, v)`` pair.
    """

    def __init__(self, message, witness=None, residual=None):
        super().__init__(message)
        self.witness = witness
        self.residual = residual


class RegistrationError(EqobsError, ValueError):
    """A catalog system failed its construction-time checks."""


class ConfigError(EqobsError, ValueError):
    """Invalid scenario configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class IntegrationError(EqobsError, RuntimeError):
    def __init__(self, message, last_good_time):
        super().__init__(f"{message} (last good time {last_good_time:.6g} s)")
        self.last_good_time = last_good_time
