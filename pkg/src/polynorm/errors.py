"""Exception hierarchy shared by the library and the command line.

Every error carries a machine-readable ``code`` and the process exit code
the CLI reports for it.
"""


class PolynormError(Exception):
    code = "error"
    exit_code = 1


class PreconditionError(PolynormError, ValueError):
    code = "precondition"
    exit_code = 2


class PointOutsideError(PreconditionError):
    code = "point-outside"


class OnSheetError(PreconditionError):
    """Query point lies on the bifurcation set within tolerance."""

    code = "on-sheet"


class DegenerateGeometryError(PreconditionError):
    code = "degenerate-geometry"


class RerouteError(PreconditionError):
    """A segment query hit coincident or non-transversal sheet crossings."""

    code = "reroute-needed"


class GenericityError(PreconditionError):
    code = "non-generic"


class NumericalAnomaly(PolynormError, ArithmeticError):
    """A result contradicts one of the structural laws the engine relies on."""

    code = "numerical-anomaly"
    exit_code = 3


class ParseError(PolynormError):
    code = "parse-error"
    exit_code = 4
