"""Exception hierarchy shared by every module."""


class ForecastError(Exception):
    """Base class for all package errors."""


class ParseError(ForecastError, ValueError):
    pass


class EmptyInputError(ForecastError, ValueError):
    pass


class InsufficientDataError(ForecastError, ValueError):
    pass


class WindowOutOfRangeError(ForecastError, IndexError):
    pass


class ShapeError(ForecastError, ValueError):
    pass


class InvalidHorizonError(ForecastError, ValueError):
    pass


class DegenerateScaleError(ForecastError, ValueError):
    pass


class StateError(ForecastError, RuntimeError):
    pass


class NumericalError(ForecastError, ArithmeticError):
    """Model estimation failed numerically."""


class StationarityError(NumericalError):
    pass


class NoModelError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass
