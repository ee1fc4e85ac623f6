"""Exception and warning types shared across the package."""


class OffieldError(Exception):
    """Base class for all library-specific failures."""


class ParameterError(OffieldError, ValueError):
    """An argument is outside an operation's documented domain."""


class GridMismatchError(OffieldError, ValueError):
    """Two objects that must share a grid do not."""


class GridTooSmallError(OffieldError, ValueError):
    """The requested evaluation needs mass the grid does not carry."""


class AlignmentError(OffieldError, ValueError):
    """A translation amount is not an integer multiple of the grid spacing."""


class OffGridError(OffieldError, ValueError):
    """A constructed function has no support left on the sampled box."""


class DegenerateInputError(OffieldError, ValueError):
    """The input is too close to zero for the requested quantity."""


class BasisTooSmallError(OffieldError, ValueError):
    """The truncated orthonormal basis misrepresents the requested operator."""


class NotPerfectDataError(OffieldError, ValueError):
    """A sequence violates a structural requirement of perfect data."""


class UndecidableLadderError(OffieldError, RuntimeError):
    """No stable asymptotic structure could be extracted from the ladder."""


class NoAdaptedSequenceError(OffieldError, RuntimeError):
    """Every admissible window growth is blocked by a bounded constraint."""


class NumericalFailureError(OffieldError, RuntimeError):
    """An internal numerical routine failed to reach its target accuracy."""


class PowerIterationWarning(RuntimeWarning):
    """Power iteration hit its iteration cap; carries the last estimate."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
