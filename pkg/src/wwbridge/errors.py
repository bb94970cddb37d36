"""Exception hierarchy shared by all modules."""


class WWBError(Exception):
    """Base class for every error raised by :mod:`wwbridge`."""


class ParameterError(WWBError, ValueError):
    pass


class DomainError(WWBError, ValueError):
    pass


class GridError(WWBError, IndexError):
    pass


class ModeError(WWBError, ValueError):
    """Exact-mode evaluation requested at a point that is not b-adic."""


class ResourceError(WWBError, MemoryError):
    pass


class NumericError(WWBError, ArithmeticError):
    pass


class EstimatorError(WWBError, ValueError):
    pass


class FitError(WWBError, ValueError):
    pass
