"""Exception types shared across the library."""


class DimensionMismatchError(ValueError):
    """Two points (or a point and a domain) disagree on dimensionality."""


class DuplicatePointError(ValueError):
    """Two inputs coincide within the duplicate tolerance (1e-12)."""


class ConditioningError(RuntimeError):
    """An SPD factorization failed even after jitter escalation."""


class ObjectiveEvaluationError(RuntimeError):
    """The black-box objective raised during a run.

    Carries the partial trace collected so far in ``partial_trace``.
    """

    def __init__(self, message, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace
