"""Exception types shared across blockboot."""


class BlockBootError(Exception):
    """Base class for blockboot errors."""


class InvalidSpecError(BlockBootError, ValueError):
    """A block length, method or weight scheme is not admissible."""


class NumericalIntegrityError(BlockBootError, ArithmeticError):
    """Two independent evaluations of the same quantity disagree."""


class UndefinedOptimumError(BlockBootError, ValueError):
    """The MSE-optimal block length does not exist (G = 0 or f(0) = 0)."""


class UnsupportedMethodError(BlockBootError, NotImplementedError):
    """The requested quantity has no supported closed form for this method."""
