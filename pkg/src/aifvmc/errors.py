"""Exception hierarchy.

``InputError`` covers anything the caller got wrong (CLI exit code 1).
``InternalError`` signals a broken invariant that the theory says cannot
happen (CLI exit code 2).
"""


class AifvmcError(Exception):
    """Base class for all package errors."""


class InputError(AifvmcError, ValueError):
    pass


class DecodeError(InputError):
    pass


class BudgetExceeded(InputError):
    """An exhaustive search would exceed its configured budget."""


class NoSliceCrossing(InputError):
    """The envelope difference has no sign change on the search interval."""


class InternalError(AifvmcError, RuntimeError):
    pass


class SnapRejected(InternalError):
    """Exact recovery produced a point that is not on every lower envelope."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
