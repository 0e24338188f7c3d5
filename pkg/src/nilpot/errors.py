"""Exception types shared across the package."""


class NilpotError(Exception):
    """Base class for all errors raised by nilpot."""


class UsageError(NilpotError, ValueError):
    """Invalid arguments: mismatched algebras, missing images, bad shapes."""


class ResourceLimitError(NilpotError):
    """A requested construction exceeds the configured size guard."""


class ClosureError(NilpotError, RuntimeError):
    """An iteration guard tripped inside a fixpoint loop; indicates a bug."""
