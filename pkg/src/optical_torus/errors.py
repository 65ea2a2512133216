"""Exception hierarchy shared across the package."""


class OpticalTorusError(Exception):
    """Base class for all package errors."""


class DomainError(OpticalTorusError, ValueError):
    """An argument lies outside the domain of an operation."""


class PolygonError(OpticalTorusError, ValueError):
    """Invalid polygon input."""


class SelfIntersectionError(PolygonError):
    def __init__(self, edge_i, edge_j):
        self.edges = (edge_i, edge_j)
        super().__init__(f"polygon is self-intersecting: edges {edge_i} and {edge_j} cross")


class DegenerateVertexError(PolygonError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"vertex {index} is degenerate (collinear neighbours or repeated point)")


class BranchPointError(DomainError):
    """Evaluation exactly at a branch point of an integrand."""


class SCSolveError(OpticalTorusError):
    """The Schwarz-Christoffel parameter problem did not converge."""

    def __init__(self, message, residual=None):
        self.residual = residual
        if residual is not None:
            message = f"{message}; residual = {list(map(float, residual))}"
        super().__init__(message)


class CrowdingError(SCSolveError):
    """Prevertices collapsed below the resolvable gap."""


class InversionError(OpticalTorusError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")


class SingularEvaluation(OpticalTorusError):
    """Raised when a field is evaluated inside the guard disk of a puncture.

    ``limit`` is the limiting index value there: ``0.0`` at a zero,
    ``math.inf`` at an infinite well, or the finite limit (sn pole).
    """

    def __init__(self, point, limit):
        self.point = point
        self.limit = limit
        super().__init__(f"evaluation at puncture {point.label} (limit {limit})")


class IncomparableCurves(OpticalTorusError, ValueError):
    pass
