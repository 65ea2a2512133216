"""Simple polygons and the straight-line billiard flow inside them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateVertexError, DomainError, PolygonError, SelfIntersectionError

ALPHA_SUM_TOL = 1e-12
ALPHA_MATCH_TOL = 1e-9
VERTEX_GUARD = 1e-9  # times the polygon diameter


def _as_complex(points) -> np.ndarray:
    arr = np.asarray(points)
    if np.iscomplexobj(arr) and arr.ndim == 1:
        return arr.astype(complex)
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise PolygonError("vertices must be complex numbers or (x, y) pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def as_point(p) -> complex:
    """Accept a complex number or an (x, y) pair."""
    if np.ndim(p) == 1:
        x, y = p
        return complex(float(x), float(y))
    return complex(p)


def _cross(a: complex, b: complex) -> float:
    return a.real * b.imag - a.imag * b.real


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _cross(q2 - q1, p1 - q1)
    d2 = _cross(q2 - q1, p2 - q1)
    d3 = _cross(p2 - p1, q1 - p1)
    d4 = _cross(p2 - p1, q2 - p1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 != 0 and d3 * d4 != 0:
        return True

    def on_seg(a, b, c, d):
        return d == 0 and min(a.real, b.real) <= c.real <= max(a.real, b.real) and min(
            a.imag, b.imag
        ) <= c.imag <= max(a.imag, b.imag)

    return on_seg(q1, q2, p1, d1) or on_seg(q1, q2, p2, d2) or on_seg(p1, p2, q1, d3) or on_seg(p1, p2, q2, d4)


@dataclass(frozen=True, eq=False)
class Polygon:
    """Counterclockwise simple polygon; ``alphas[i] * pi`` is the interior angle at vertex i."""

    vertices: np.ndarray
    alphas: np.ndarray

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def diameter(self) -> float:
        z = self.vertices
        return float(np.max(np.abs(z[:, None] - z[None, :])))

    def edge(self, i: int) -> tuple[complex, complex]:
        return complex(self.vertices[i]), complex(self.vertices[(i + 1) % self.n])

    def edge_lengths(self) -> np.ndarray:
        return np.abs(np.roll(self.vertices, -1) - self.vertices)

    def contains(self, z: complex) -> bool:
        """Strict interior test (even-odd rule)."""
        z = complex(z)
        inside = False
        for i in range(self.n):
            a, b = self.edge(i)
            if (a.imag > z.imag) != (b.imag > z.imag):
                x = a.real + (z.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
                if x > z.real:
                    inside = not inside
        return inside and self.boundary_distance(z) > 0.0

    def boundary_distance(self, z: complex) -> float:
        z = complex(z)
        best = math.inf
        for i in range(self.n):
            a, b = self.edge(i)
            t = ((z - a) * (b - a).conjugate()).real / abs(b - a) ** 2
            t = min(1.0, max(0.0, t))
            best = min(best, abs(z - (a + t * (b - a))))
        return best

    def rotated(self, pivot: int) -> "Polygon":
        """Same polygon with vertex ``pivot`` relabelled as vertex 0."""
        return Polygon(np.roll(self.vertices, -pivot), np.roll(self.alphas, -pivot))

    def to_dict(self) -> dict:
        return {"vertices": [[float(z.real), float(z.imag)] for z in self.vertices]}


def make_polygon(vertices: Sequence, alphas: Sequence[float] | None = None) -> Polygon:
    """Validate a vertex chain and return a counterclockwise :class:`Polygon`.

    Interior angles are always recomputed from the geometry; when ``alphas``
    is supplied it must agree to 1e-9.
    """
    z = _as_complex(vertices)
    n = len(z)
    if n < 3:
        raise PolygonError(f"need at least 3 vertices, got {n}")
    for i in range(n):
        if z[i] == z[(i + 1) % n]:
            raise DegenerateVertexError(i)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(z[i], z[(i + 1) % n], z[j], z[(j + 1) % n]):
                raise SelfIntersectionError(i, j)
    area2 = sum(_cross(z[i], z[(i + 1) % n]) for i in range(n))
    if area2 == 0:
        raise PolygonError("polygon has zero area")
    reversed_input = area2 < 0
    if reversed_input:
        z = z[::-1].copy()

    incoming = z - np.roll(z, 1)
    outgoing = np.roll(z, -1) - z
    turn = np.angle(outgoing / incoming)
    for i, t in enumerate(turn):
        if abs(t) < 1e-12 or abs(abs(t) - math.pi) < 1e-12:
            raise DegenerateVertexError((n - 1 - i) if reversed_input else i)
    geo = 1.0 - turn / math.pi
    if abs(geo.sum() - (n - 2)) > ALPHA_SUM_TOL * n:
        raise PolygonError(f"interior angles sum to {geo.sum()} pi, expected {n - 2} pi")
    if alphas is not None:
        given = np.asarray(alphas, dtype=float)
        if reversed_input:
            given = given[::-1]
        if given.shape != geo.shape or np.max(np.abs(given - geo)) > ALPHA_MATCH_TOL:
            raise PolygonError("supplied interior angles disagree with the vertex geometry")
    return Polygon(z, geo)


class RationalCheck(NamedTuple):
    rational: bool
    fractions: tuple[Fraction, ...]


def is_rational(p: Polygon, max_denominator: int = 100, tol: float = 1e-9) -> RationalCheck:
    fracs = tuple(Fraction(float(a)).limit_denominator(max_denominator) for a in p.alphas)
    ok = all(abs(float(f) - a) <= tol for f, a in zip(fracs, p.alphas))
    return RationalCheck(ok, fracs)


class Bounce(NamedTuple):
    point: complex
    direction: complex  # outgoing unit direction
    edge: int


@dataclass
class PolygonalTrajectory:
    polygon: Polygon
    start: complex
    start_direction: complex
    bounces: list[Bounce] = field(default_factory=list)
    status: str = "ok"
    tail: float = 0.0  # free flight after the last bounce before the next wall

    @property
    def segment_lengths(self) -> list[float]:
        pts = [self.start] + [b.point for b in self.bounces]
        return [abs(pts[i + 1] - pts[i]) for i in range(len(pts) - 1)]

    @property
    def total_length(self) -> float:
        return float(sum(self.segment_lengths))

    def legs(self):
        """Yield ``(origin, unit direction, length, bounce_or_None)`` for every straight leg."""
        origin, d = self.start, self.start_direction
        for b in self.bounces:
            yield origin, d, abs(b.point - origin), b
            origin, d = b.point, b.direction
        yield origin, d, self.tail, None

    def point_at(self, length: float) -> tuple[complex, complex]:
        """Position and direction after travelling ``length`` from the start."""
        acc = 0.0
        for origin, d, ell, _ in self.legs():
            if length <= acc + ell:
                return origin + (length - acc) * d, d
            acc += ell
        raise DomainError(f"length {length} exceeds the traced trajectory ({acc})")


def _reflect(d: complex, edge_dir: complex) -> complex:
    t = edge_dir / abs(edge_dir)
    return t * t * d.conjugate()


def trace_billiard(p: Polygon, start, direction, max_bounces: int) -> PolygonalTrajectory:
    """Follow a billiard ray for at most ``max_bounces`` specular reflections.

    Hitting within ``VERTEX_GUARD * diameter`` of a corner stops the trace
    with ``status == "vertex_hit"``; the last recorded leg ends at the corner
    approach point and is not reflected.
    """
    z, d = as_point(start), as_point(direction)
    if d == 0:
        raise DomainError("direction must be nonzero")
    d /= abs(d)
    if not p.contains(z):
        raise DomainError(f"start point {z} is not strictly inside the polygon")
    guard = VERTEX_GUARD * p.diameter
    traj = PolygonalTrajectory(p, z, d)
    last_edge = -1
    for count in range(max_bounces + 1):
        hit = _next_hit(p, z, d, last_edge)
        t, e, point = hit
        if count == max_bounces:
            traj.tail = t
            break
        a, b = p.edge(e)
        if min(abs(point - a), abs(point - b)) < guard:
            traj.status = "vertex_hit"
            traj.tail = t
            break
        d = _reflect(d, b - a)
        traj.bounces.append(Bounce(point, d, e))
        z, last_edge = point, e
    return traj


def _next_hit(p: Polygon, z: complex, d: complex, skip: int) -> tuple[float, int, complex]:
    best_t, best_e = math.inf, -1
    for e in range(p.n):
        if e == skip:
            continue
        a, b = p.edge(e)
        s = b - a
        den = _cross(d, s)
        if den == 0.0:
            if _cross(a - z, d) == 0.0:
                raise DomainError(f"ray runs along edge {e}")
            continue
        t = _cross(a - z, s) / den
        u = _cross(a - z, d) / den
        if t > 0.0 and -1e-14 <= u <= 1.0 + 1e-14 and t < best_t:
            best_t, best_e = t, e
    if best_e < 0:
        raise DomainError("ray escaped the polygon (start not interior?)")
    return best_t, best_e, z + best_t * d


def detect_period(t: PolygonalTrajectory, tol: float = 1e-9) -> int | None:
    """Smallest m with bounce m matching bounce 0 in point and direction."""
    bs = t.bounces
    if len(bs) < 2:
        return None
    p0, d0 = bs[0].point, bs[0].direction
    for m in range(1, len(bs)):
        if abs(bs[m].point - p0) <= tol and abs(bs[m].direction - d0) <= tol:
            return m
    return None


@dataclass(frozen=True)
class Isometry:
    """Plane isometry ``z -> a * z + b`` (or ``a * conj(z) + b`` when ``flip``)."""

    a: complex = 1.0 + 0j
    b: complex = 0j
    flip: bool = False

    def __call__(self, z):
        return self.a * (np.conj(z) if self.flip else z) + self.b

    def then(self, other: "Isometry") -> "Isometry":
        """``self`` applied first, then ``other``."""
        a1 = self.a.conjugate() if other.flip else self.a
        b1 = self.b.conjugate() if other.flip else self.b
        return Isometry(other.a * a1, other.a * b1 + other.b, self.flip != other.flip)

    def linear(self, v):
        return self.a * (np.conj(v) if self.flip else v)

    @classmethod
    def reflection(cls, p: complex, q: complex) -> "Isometry":
        t = (q - p) / abs(q - p)
        return cls(t * t, p - t * t * p.conjugate(), True)


def unfold_billiard(t: PolygonalTrajectory) -> np.ndarray:
    """Unfolded images of the start and bounce points (a straight line for a true orbit)."""
    T = Isometry()
    pts = [t.start]
    for b in t.bounces:
        pts.append(T(b.point))
        T = Isometry.reflection(*t.polygon.edge(b.edge)).then(T)
    return np.array(pts)
