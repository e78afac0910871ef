"""Exception types shared across the toolkit."""


class XlpError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(XlpError):
    """Array shapes of A, b, w, senses, bounds or integrality disagree."""


class InvalidStructure(XlpError):
    """A named structure references rows/columns/entries that do not exist."""


class UnknownStructure(XlpError):
    """Requested structure name is not defined on the problem."""


class ParseError(XlpError):
    """Malformed problem/MRF JSON or energy CSV; carries location context."""

    def __init__(self, message, *, field=None, line=None):
        loc = []
        if field is not None:
            loc.append(f"field {field!r}")
        if line is not None:
            loc.append(f"line {line}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.field = field
        self.line = line


class CycleDetected(XlpError):
    """Simplex failed to terminate even under the anti-cycling rule."""


class NotOptimal(XlpError):
    """Gradient/attribution computation requires an optimal solution."""


class ProbeInfeasible(XlpError):
    """A finite-difference probe made the program infeasible or unbounded."""


class MapMismatch(XlpError):
    """Gradient bundle does not carry derivatives for the requested map."""


class PathInfeasible(XlpError):
    """An interpolated program along the integrated-gradients path failed."""

    def __init__(self, alpha, status):
        super().__init__(
            f"interpolated program at alpha={alpha:.6g} is {status}"
        )
        self.alpha = alpha
        self.status = status


class BaselineInapplicable(XlpError):
    """Requested baseline kind cannot be built for this problem."""


class InvalidGraph(XlpError):
    """Graph input has self-loops, duplicate edges or bad node references."""


class Unreachable(XlpError):
    """Target node cannot be reached from the source node."""


class NonIntegralSolution(XlpError):
    """MAP relaxation returned fractional node marginals."""


class NegativeDemand(XlpError):
    """Energy demand series contains negative entries."""


class CertificationFailed(XlpError):
    """An entry claimed irrelevant actually changes the model output."""


class SolveFailed(XlpError):
    """A solve required by a property diagnostic did not reach optimality."""
