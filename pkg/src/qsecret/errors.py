"""Exception hierarchy. The CLI maps these onto exit codes."""


class QSecretError(Exception):
    """Base class for all package errors."""


class InvariantError(QSecretError, ValueError):
    """An input violates a type invariant or an operation precondition."""


class DimensionError(InvariantError):
    """Subsystem dimensions or alphabet sizes do not match."""


class NumericalError(QSecretError, ArithmeticError):
    """A numerical routine failed or produced an out-of-tolerance result."""
