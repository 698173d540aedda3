"""Exception types raised by qgabor."""


class QGaborError(Exception):
    """Base class for all library errors."""


class DegenerateInput(QGaborError, ZeroDivisionError):
    """Inversion of a (near-)zero quaternion was requested."""


class ShapeMismatch(QGaborError, ValueError):
    """Two fields were combined on different grids."""


class GridMismatch(QGaborError, ValueError):
    """A requested point or sub-grid is not contained in a field's sample grid."""


class ExtentNotIntegral(QGaborError, ValueError):
    """The grid extent does not tile into whole unit cubes."""


class UnknownSignal(QGaborError, KeyError):
    pass


class FormatError(QGaborError, ValueError):
    """A file could not be parsed as the expected format."""


class WindowNotReal(QGaborError, ValueError):
    pass


class InsufficientDecay(QGaborError, ValueError):
    """The signal is not negligible outside the lattice-sum truncation window.

    Usually fixed by enlarging the grid extent or the Zak radius.
    """


class NearSingularTheta(QGaborError, ArithmeticError):
    pass


class NyquistViolation(QGaborError, ValueError):
    pass
