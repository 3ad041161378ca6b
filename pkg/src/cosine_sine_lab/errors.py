"""Exception hierarchy shared by every module."""


class LabError(Exception):
    """Base class for all errors raised by the package."""


class MalformedInput(LabError, ValueError):
    """JSON or descriptor input that does not follow the documented shape."""


class ElementMismatch(LabError, ValueError):
    pass


class Overflow(LabError, OverflowError):
    """Lattice coordinates leave the int64 range or an exponential leaves double range."""


class NotAssociative(LabError, ValueError):
    def __init__(self, triple):
        self.triple = triple
        super().__init__(f"table is not associative at {triple}")


class NoIdentity(LabError, ValueError):
    pass


class NonInvertible(LabError, ValueError):
    def __init__(self, where, index, detail=""):
        self.where = where
        self.index = index
        super().__init__(f"{where} {index} is not a permutation{detail}")


class BadSchedule(LabError, ValueError):
    pass


class InconclusiveDependence(LabError):
    def __init__(self, message, trace=()):
        self.trace = tuple(trace)
        super().__init__(message)


class InvalidParams(LabError, ValueError):
    pass


class NotLattice(LabError, ValueError):
    pass


class NotFinite(LabError, ValueError):
    pass


class UnboundedCauchyDefect(LabError):
    pass


class ZeroCharacter(LabError, ValueError):
    pass


class DegenerateGram(LabError):
    pass


class TooLarge(LabError, ValueError):
    pass
