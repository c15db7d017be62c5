"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input (wrong shape, bad parameter)."""


class DomainError(ValueError):
    """Input is well formed but outside the mathematical domain of the operation."""


class NotNormalizedError(InputError):
    """A v-spec or pmf was required to be normalized and is not."""


class LogConvexityError(InputError):
    """A sequence that must be log-convex is not.

    Carries the failing check report so callers (and the CLI) can surface
    the violating index triple.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConvergenceError(RuntimeError):
    """A truncated computation did not reach the requested accuracy.

    The message says which cutoff to raise.
    """
