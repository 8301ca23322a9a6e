"""Exception and warning types raised by rpsparse."""


class RpSparseError(Exception):
    """Base class for all rpsparse errors."""


class DimensionMismatchError(RpSparseError, ValueError):
    pass


class ConstantColumnError(RpSparseError, ValueError):
    def __init__(self, column, name=None):
        self.column = column
        self.name = name
        label = name if name is not None else f"index {column}"
        super().__init__(f"predictor column {label} is constant")


class EmptyDataError(RpSparseError, ValueError):
    pass


class NonPositiveSigmaError(RpSparseError, ValueError):
    pass


class DegenerateWeightsError(RpSparseError, FloatingPointError):
    pass


class DegenerateScaleError(RpSparseError, FloatingPointError):
    """The scale estimate collapsed to (numerically) zero.

    When raised by the solver, ``objective_trace`` holds the criterion values
    of the iterations completed before the collapse.
    """

    def __init__(self, message, objective_trace=()):
        super().__init__(message)
        self.objective_trace = tuple(objective_trace)


class NegativeArgumentError(RpSparseError, ValueError):
    pass


class NonPositiveArgumentError(RpSparseError, ValueError):
    pass


class ZeroComponentError(RpSparseError, ValueError):
    pass


class DomainError(RpSparseError, ValueError):
    pass


class AlphaZeroError(RpSparseError, ValueError):
    pass


class SingularJError(RpSparseError, ArithmeticError):
    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class PTooSmallError(RpSparseError, ValueError):
    pass


class NotConvergedWarning(RuntimeWarning):
    """Iteration cap reached before the stopping rule was met.

    The fit is still returned, with ``converged=False``.
    """
