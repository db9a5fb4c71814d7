"""Exception hierarchy shared across the package."""


class RdoError(Exception):
    """Base class for every error raised by rdolab."""


class DimensionError(RdoError, ValueError):
    """Operand shapes are incompatible."""


class GraphError(RdoError):
    """The differentiation graph cannot be traversed (non-scalar loss, cycle)."""


class NumericalError(RdoError, ArithmeticError):
    """A computation produced NaN/Inf or a solver failed to converge."""


class ModeOverflowError(RdoError, ValueError):
    """More Fourier modes were requested than the grid can represent."""

    def __init__(self, modes, m):
        self.modes = modes
        self.m = m
        super().__init__(
            f"{modes} retained modes need at least {max(2 * modes - 2, 2)} grid points "
            f"(floor(m/2)+1 >= modes), got m={m}"
        )


class ResolutionMismatchError(RdoError, ValueError):
    """A fixed-resolution model was fed an input of a different resolution."""

    def __init__(self, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(
            f"branch net was built for {expected} input points but received {got}; "
            "retraining required for a new input resolution"
        )


class ConfigError(RdoError, ValueError):
    """Invalid or unknown configuration entry."""


class FormatError(RdoError, ValueError):
    """A binary or text file does not follow the expected layout."""
