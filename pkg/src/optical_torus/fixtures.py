"""Reference polygons and launch data used by the checks, tests and examples."""

from __future__ import annotations

import math

from .polygon import Polygon, make_polygon
from .schwarz import square_matching_k

ACUTE_TRIANGLE = [(0.0, 0.0), (4.0, 0.0), (1.0, 3.0)]
EQUILATERAL = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)]
UNIT_SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
PENTAGON = [(0.0, 0.0), (2.0, 0.0), (2.6, 1.5), (1.0, 2.6), (-0.6, 1.4)]
HEXAGON = [(0.0, 0.0), (3.0, -0.4), (4.6, 1.1), (4.2, 3.0), (1.8, 3.9), (-0.5, 2.2)]

# k and pivot for which the scalene hexagon has an admissible normalisation
HEXAGON_K = 0.3
HEXAGON_PIVOT = 5
HEXAGON_START = complex(1.5, 1.2)
HEXAGON_DIRECTION = complex(1.0, 0.37)

# square diamond: a generic start avoids the corner-to-corner diagonals
DIAMOND_START = complex(0.75, 0.25)
DIAMOND_DIRECTION = complex(1.0, 1.0)

SQUARE_K = square_matching_k()
RECTANGLE_K = 0.5


def polygon(name: str) -> Polygon:
    table = {
        "triangle": ACUTE_TRIANGLE,
        "equilateral": EQUILATERAL,
        "square": UNIT_SQUARE,
        "pentagon": PENTAGON,
        "hexagon": HEXAGON,
    }
    return make_polygon(table[name])


def _foot(p: complex, q: complex, r: complex) -> complex:
    d = r - q
    return q + ((p - q) * d.conjugate()).real / abs(d) ** 2 * d


def fagnano_launch(p: Polygon) -> tuple[complex, complex]:
    """Midpoint of one side of the orthic triangle, heading along it."""
    A, B, C = (complex(z) for z in p.vertices)
    Ha, Hc = _foot(A, B, C), _foot(C, A, B)
    return 0.5 * (Ha + Hc), Ha - Hc


PENTAGON_K = 0.3
PENTAGON_PIVOT = 4
