"""Exception types raised across the package."""


class TwistError(Exception):
    """Base class for all package errors."""


class NotHermitian(TwistError):
    pass


class NotCommuting(TwistError):
    def __init__(self, first: int, second: int, norm: float):
        super().__init__(f"members {first} and {second} do not commute (|[A,B]| = {norm:.3e})")
        self.witness = (first, second, norm)


class UnknownVertex(TwistError):
    pass


class DegreeMismatch(TwistError):
    pass


class UnknownHom(TwistError):
    pass


class InvalidCocycle(TwistError):
    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NotGoodCover(TwistError):
    pass


class ResolutionViolated(TwistError):
    pass


class NonIntegerCocycle(TwistError):
    pass


class CoverMismatch(TwistError):
    pass


class ShapeMismatch(TwistError):
    pass


class BadPartition(TwistError):
    pass


class NoRange(TwistError):
    pass


class AmbiguousRange(TwistError):
    pass


class RangeNotWellDefined(TwistError):
    pass


class NotContained(TwistError):
    pass


class Branched(TwistError):
    pass


class NotConstantRank(TwistError):
    pass


class ParseError(TwistError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
