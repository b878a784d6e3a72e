"""Exception hierarchy shared by every module."""


class QuasizeroError(Exception):
    """Base class for all library errors."""


class ParameterError(QuasizeroError, ValueError):
    """An argument lies outside its documented domain."""


class NormalizationError(QuasizeroError):
    """A weight table cannot be rescaled to a probability-normalized weight."""


class MembershipError(QuasizeroError):
    """A coefficient list does not define a member of the weighted class."""


class DivergenceError(QuasizeroError):
    """A weighted sum could not be confined to a finite summation window."""


class UnreachableThreshold(QuasizeroError):
    """``h(p) <= eps`` has no solution; ``limit`` is the infimum of ``h``."""

    def __init__(self, eps, limit):
        super().__init__(f"h(p) <= {eps!r} is unreachable (inf h = {limit!r})")
        self.eps = eps
        self.limit = limit


class BudgetExceeded(QuasizeroError):
    """The partial sums of ``h`` stayed below the target within the budget."""

    def __init__(self, target, budget, H_at_budget):
        super().__init__(
            f"H(p) < {target!r} for all p <= {budget} (H({budget}) = {H_at_budget!r})"
        )
        self.target = target
        self.budget = budget
        self.H_at_budget = H_at_budget


class ContourError(QuasizeroError):
    """Contour integration could not be stabilized away from the zeros."""
