"""Exception types shared across the package."""


class InvalidParameter(ValueError):
    """An argument violates an operation's precondition."""


class InvalidModel(ValueError):
    """A causal model or distribution fails a structural invariant."""


class NodeGuardExceeded(RuntimeError):
    """A structure exceeds the desk-scale node guard for full marginalization."""
