"""Exception hierarchy shared across the package."""


class IrgraphError(Exception):
    pass


class ModelError(IrgraphError, ValueError):
    """A model specification failed validation. ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class AsymmetricC(ModelError):
    pass


class NonPositiveA(ModelError):
    pass


class NegativeC(ModelError):
    pass


class DisconnectedCollapse(ModelError):
    pass


class IndexOutOfRange(IrgraphError, IndexError):
    pass


class NoConvergence(IrgraphError, ArithmeticError):
    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class ZeroMatrix(IrgraphError, ValueError):
    pass


class DomainError(IrgraphError, ValueError):
    pass


class DegenerateInput(DomainError):
    pass


class EmptyStart(IrgraphError, ValueError):
    pass


class BadDelta(IrgraphError, ValueError):
    pass
