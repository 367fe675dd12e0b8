"""Exception hierarchy.

Input problems derive from :class:`TapeError`; numerical failures derive from
:class:`NumericalError`. The CLI maps the two families to distinct exit codes.
"""


class TapevarError(Exception):
    """Base class for every error raised by this package."""


class TapeError(TapevarError, ValueError):
    """Bad input: malformed records, invalid parameters, empty selections."""


class MalformedRecord(TapeError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class NonPositiveVolume(MalformedRecord):
    pass


class NonPositiveValue(MalformedRecord):
    pass


class PriceInconsistent(MalformedRecord):
    pass


class EmptyTape(TapeError):
    pass


class EmptyWindow(TapeError):
    pass


class InvalidSpec(TapeError):
    pass


class UnsupportedOrder(TapeError):
    pass


class OrderExceedsFit(TapeError):
    pass


class PointMassUnsupported(TapeError):
    pass


class NumericalError(TapevarError, ArithmeticError):
    """A computation was well posed on input but failed numerically."""


class OrderOverflow(NumericalError):
    def __init__(self, n, index, message=None):
        self.n = n
        self.index = index
        super().__init__(message or f"power {n} of trade #{index} is not finite")


class NegativeVariance(NumericalError):
    def __init__(self, variance, message=None):
        self.variance = variance
        super().__init__(
            message
            or f"market variance p(2) - p(1)^2 = {variance!r} is negative; "
            "the Gaussian approximation does not exist for this slice"
        )


class NonPositiveVariance(NumericalError):
    def __init__(self, variance):
        self.variance = variance
        super().__init__(f"variance must be > 0 to fit order >= 2, got {variance!r}")


class QuadratureFailure(NumericalError):
    def __init__(self, error_estimate, message=None):
        self.error_estimate = error_estimate
        super().__init__(
            message or f"Fourier inversion did not converge (error estimate {error_estimate:.3g})"
        )


class BracketFailure(NumericalError):
    pass
