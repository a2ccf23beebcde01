"""Exception types raised across the package."""


class RankDeficient(ArithmeticError):
    """A Gram-Schmidt column collapsed below the rank tolerance."""

    def __init__(self, column: int, residual: float):
        super().__init__(f"column {column} has residual norm {residual:.3e}")
        self.column = column
        self.residual = residual


class NotSymmetric(ValueError):
    pass


class InvalidBudget(ValueError):
    pass


class NonPositiveSigma(ValueError):
    pass


class MagnitudeTooLarge(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyDataset(ValueError):
    pass


class ZeroReference(ZeroDivisionError):
    pass


class ZeroGap(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class ConfigError(ValueError):
    pass
