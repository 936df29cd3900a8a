"""Exception hierarchy.

Precondition errors subclass :class:`ValueError`; numeric failures (a solver
that ran and did not produce an answer) subclass :class:`NumericFailure`.
The command line maps the first group to exit status 2 and the second to 3.
"""


class TreeZerosError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(TreeZerosError, ValueError):
    """An input violates the documented precondition of an operation."""


class NumericFailure(TreeZerosError, ArithmeticError):
    """A numerical procedure ran but did not reach its contract."""


class InvalidWord(PreconditionError):
    pass


class PoleAlpha(PreconditionError):
    pass


class DegenerateMap(PreconditionError):
    pass


class InexactMultiplier(PreconditionError):
    pass


class CapExceeded(PreconditionError):
    def __init__(self, estimate, cap, what="term count"):
        self.estimate = estimate
        self.cap = cap
        super().__init__(f"estimated {what} {estimate} exceeds cap {cap}")


class TooLarge(PreconditionError):
    pass


class EarlyHit(PreconditionError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"orbit reaches -1 at index {index}, before the final step; truncate the word")


class PoleOnOrbit(NumericFailure):
    def __init__(self, index):
        self.index = index
        super().__init__(f"orbit passes through the pole guard at step {index}")


class PoleCollision(NumericFailure):
    def __init__(self, message="iterate entered the pole guard", indices=()):
        self.indices = tuple(indices)
        super().__init__(message)


class NoConvergence(NumericFailure):
    def __init__(self, max_iters, last_residual):
        self.max_iters = max_iters
        self.last_residual = last_residual
        super().__init__(f"no convergence after {max_iters} iterations (residual {last_residual:.3e})")


class SingularJacobian(NumericFailure):
    def __init__(self, condition):
        self.condition = condition
        super().__init__(f"Jacobian condition number {condition:.3e} above threshold")


class ContinuationStall(NumericFailure):
    def __init__(self, theta, reason, partial=None):
        self.theta = theta
        self.reason = reason
        self.partial = partial
        super().__init__(f"continuation stalled at theta={theta:.6g}: {reason}")


class NoHit(NumericFailure):
    pass


class Exhausted(NumericFailure):
    def __init__(self, n_max, radii, stats=None):
        self.n_max = n_max
        self.radii = tuple(radii)
        self.stats = dict(stats or {})
        super().__init__(f"no certified hit for N <= {n_max} over {len(self.radii)} radii")
