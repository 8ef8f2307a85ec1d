"""Exception types shared by all engines."""


class InvalidParameter(ValueError):
    """A physical or numerical parameter is out of its valid range.

    The message names the offending parameter so batch callers can
    report it verbatim.
    """


class UnsupportedSequence(InvalidParameter):
    """An operation requiring a uniform (PDD) sequence got something else."""


class NumericFailure(RuntimeError):
    """A quadrature or integrator failed to reach its tolerance.

    Carries a ``diagnostics`` dict with the achieved error and the
    refinement level reached.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class CapacityExceeded(RuntimeError):
    """A requested basis would exceed the configured state-space budget."""

    def __init__(self, message, dimension):
        super().__init__(message)
        self.dimension = dimension
