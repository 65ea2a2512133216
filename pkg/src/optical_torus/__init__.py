"""Polygon billiards as light rays on a flat optical torus.

A simple polygon is mapped conformally onto a rectangle through the upper
half-plane; the billiard flow becomes the ray flow of the flat refractive
index ``n = |dz/dw|``, which extends by reflection to a punctured torus.
"""

from .elliptic import EllipticModulus, SnValue, complete_K, dF_deta, incomplete_F, jacobi_sn
from .errors import (
    BranchPointError,
    CrowdingError,
    DegenerateVertexError,
    DomainError,
    IncomparableCurves,
    InversionError,
    OpticalTorusError,
    PolygonError,
    SCSolveError,
    SelfIntersectionError,
    SingularEvaluation,
)
from .field import (
    AnalyticExampleField,
    IndexField,
    SingularPoint,
    analytic_example_field,
    build_field,
    fold_to_rectangle,
    harmonicity_residual,
    wrap_to_domain,
)
from .geodesic import (
    ClosedGeodesic,
    Comparison,
    CurvedTrajectory,
    closed_geodesic_check,
    compare_curves,
    fold_trajectory,
    integrate_geodesic,
    reflect_in_rectangle,
    transport_segment,
    transport_trajectory,
    unfold_to_torus,
)
from .kernels import BACKEND
from .polygon import (
    Polygon,
    PolygonalTrajectory,
    detect_period,
    is_rational,
    make_polygon,
    trace_billiard,
    unfold_billiard,
)
from .schwarz import (
    ConformalChart,
    SCChart,
    admissible_k_max,
    build_chart,
    eval_halfplane_to_polygon,
    eval_halfplane_to_rectangle,
    invert_polygon_map,
    rectangle_polygon,
    solve_parameters,
    square_matching_k,
)

__version__ = "0.1.0"
