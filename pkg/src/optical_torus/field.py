"""Flat refractive-index fields on the rectangle, the fundamental domain and the torus.

On the rectangle ``R = [-a, a] x [0, b]`` the index is ``n(w) = |dz/dw|`` for
the polygon chart, which factorises through ``eta = sn(w)`` as

    n(w) = A' prod_j |eta - c_j|^(e_j),   sum_j e_j = 0.

The fundamental domain ``F = [-a, 3a] x [0, 2b]`` holds R and its mirror
copies; identifying opposite sides of F gives the torus (lattice 4a x 2b).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .elliptic import EllipticModulus, incomplete_F
from .errors import DomainError, SingularEvaluation
from .polygon import is_rational, make_polygon
from .schwarz import ConformalChart

FIELD_GUARD = 1e-8  # epsilon_s, times min(a, b)
HARMONIC_EXCLUSION = 10.0  # punctures must stay this many grid spacings away


def wrap_to_domain(u: float, v: float, a: float, b: float) -> tuple[float, float]:
    """Reduce a point of the plane to F = [-a, 3a) x [0, 2b)."""
    return (u + a) % (4.0 * a) - a, v % (2.0 * b)


def fold_to_rectangle(u: float, v: float, a: float, b: float) -> tuple[float, float, int, int]:
    """Fold a plane point into R; also return the reflection signs (su, sv)."""
    u, v = wrap_to_domain(u, v, a, b)
    su = sv = 1
    if u > a:
        u, su = 2.0 * a - u, -1
    if v > b:
        v, sv = 2.0 * b - v, -1
    return u, v, su, sv


@dataclass(frozen=True)
class SingularPoint:
    label: str
    kind: str  # "corner", "vertex" or "pole"
    location: complex  # torus coordinates in F
    exponent: float  # exponent of the |eta - c| factor (0 for the pole)
    w_exponent: float  # local power law of n in |w - location|
    twin: str | None = None
    vertex: int | None = None  # polygon vertex index, pivot-relative, for vertex images
    side: str | None = None
    center: float | None = None  # eta-plane location (None for the pole at infinity)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "location": [self.location.real, self.location.imag],
            "exponent": self.exponent,
            "w_exponent": self.w_exponent,
            "twin": self.twin,
            "vertex": self.vertex,
            "side": self.side,
        }


def _vertex_label(i: int) -> str:
    # vertex index i >= 3 (0-based) -> A, B, C, ...
    j = i - 3
    return chr(ord("A") + j) if j < 26 else f"V{i + 1}"


@dataclass(frozen=True, eq=False)
class IndexField:
    periodic = True

    chart: ConformalChart
    modulus: EllipticModulus
    centers: np.ndarray
    exponents: np.ndarray
    scale: float
    catalog: tuple[SingularPoint, ...]

    @property
    def a(self) -> float:
        return self.modulus.a

    @property
    def b(self) -> float:
        return self.modulus.b

    @property
    def width(self) -> float:
        return 2.0 * self.modulus.a

    @property
    def height(self) -> float:
        return self.modulus.b

    @property
    def lattice(self) -> tuple[float, float]:
        return 4.0 * self.a, 2.0 * self.b

    @property
    def factors(self) -> list[tuple[float, float]]:
        return list(zip(self.centers.tolist(), self.exponents.tolist()))

    def exponent_sum(self):
        """Exact (Fraction) when the polygon is rational, float otherwise."""
        check = is_rational(self.chart.sc.target)
        if not check.rational:
            return float(np.sum(self.exponents))
        al = check.fractions
        half = Fraction(1, 2)
        return (al[0] - half) + (al[1] - half) + (al[2] - half) + half + sum((x - 1 for x in al[3:]), Fraction(0))

    def _in_rectangle(self, u: float, v: float) -> bool:
        tol = 1e-12 * max(self.a, self.b)
        return -self.a - tol <= u <= self.a + tol and -tol <= v <= self.b + tol

    def _guard(self, u: float, v: float, radius: float):
        w = complex(u, v)
        for p in self.punctures_in_rectangle():
            if abs(w - p.location) < radius:
                return p
        return None

    def punctures_in_rectangle(self) -> list[SingularPoint]:
        """Catalog entries lying on the closed rectangle R."""
        return [p for p in self.catalog if self._in_rectangle(p.location.real, p.location.imag)]

    def _limit(self, p: SingularPoint) -> float:
        # a vertex image may coincide with a corner; mirror twins count once
        same, seen = [], set()
        for q in self.catalog:
            key = (q.kind, q.vertex if q.kind == "vertex" else q.label)
            if abs(q.location - p.location) < 1e-12 * self.a and key not in seen:
                seen.add(key)
                same.append(q)
        if p.kind == "pole":
            # exponents sum to zero, so the product tends to 1 as eta -> infinity
            return self.scale
        total = sum(q.w_exponent for q in same)
        if abs(total) > 1e-12:
            return 0.0 if total > 0 else math.inf
        c = p.center
        keep = np.abs(self.centers - c) > 1e-9 * abs(c)
        return float(self.scale * np.prod(np.abs(c - self.centers[keep]) ** self.exponents[keep]))

    def _index_raw(self, u: float, v: float) -> float:
        S, _, _ = kernels.log_index_grad(u, v, self.modulus.k, self.modulus.k_prime, self.b,
                                         self.centers, self.exponents)
        return self.scale * math.exp(S)

    def index_at(self, w: complex) -> float:
        """``n(w) = |dz/dw|`` at a point of the closed rectangle."""
        w = complex(w)
        if not self._in_rectangle(w.real, w.imag):
            raise DomainError(f"{w} is outside the rectangle [-a, a] x [0, b]")
        p = self._guard(w.real, w.imag, FIELD_GUARD * min(self.a, self.b))
        if p is not None:
            raise SingularEvaluation(p, self._limit(p))
        return self._index_raw(w.real, w.imag)

    def extended_index_at(self, u: float, v: float) -> float:
        """Index extended to F (and the torus) by the mirror reflections of R."""
        uf, vf, _, _ = fold_to_rectangle(u, v, self.a, self.b)
        return self.index_at(complex(uf, vf))

    def potential_at(self, u: float, v: float) -> float:
        """``U = -n_e^2 / 2``; 0 at zeros of n, :class:`SingularEvaluation` at wells."""
        try:
            n = self.extended_index_at(u, v)
        except SingularEvaluation as exc:
            if exc.limit == 0.0:
                return 0.0
            if math.isfinite(exc.limit):
                return -0.5 * exc.limit**2
            raise
        return -0.5 * n * n

    def index_and_log_gradient(self, u: float, v: float) -> tuple[float, float, float]:
        """``(n_e, d ln n_e/du, d ln n_e/dv)`` anywhere in the unfolded plane."""
        uf, vf, su, sv = fold_to_rectangle(u, v, self.a, self.b)
        S, gu, gv = kernels.log_index_grad(uf, vf, self.modulus.k, self.modulus.k_prime, self.b,
                                           self.centers, self.exponents)
        return self.scale * math.exp(S), su * gu, sv * gv

    def log_index(self, u: float, v: float) -> float:
        uf, vf, _, _ = fold_to_rectangle(u, v, self.a, self.b)
        S, _, _ = kernels.log_index_grad(uf, vf, self.modulus.k, self.modulus.k_prime, self.b,
                                         self.centers, self.exponents)
        return math.log(self.scale) + S

    def puncture_distance(self, u: float, v: float) -> tuple[float, SingularPoint]:
        """Distance (in the folded rectangle) to the nearest puncture."""
        uf, vf, _, _ = fold_to_rectangle(u, v, self.a, self.b)
        w = complex(uf, vf)
        best = min(self.punctures_in_rectangle(), key=lambda p: abs(w - p.location))
        return abs(w - best.location), best

    def singular_catalog(self) -> list[SingularPoint]:
        return list(self.catalog)

    def metadata(self) -> dict:
        return {
            "k": self.modulus.k,
            "a": self.a,
            "b": self.b,
            "scale": self.scale,
            "factors": [[c, e] for c, e in self.factors],
            "catalog": [p.to_dict() for p in self.catalog],
        }


def build_field(chart: ConformalChart, modulus: EllipticModulus | None = None) -> IndexField:
    m = modulus or chart.modulus
    sc = chart.sc
    k = m.k
    al = sc.target.alphas
    centers = [-1.0 / k, -1.0, 1.0, 1.0 / k] + list(sc.prevertices[3:])
    exps = [al[0] - 0.5, al[1] - 0.5, al[2] - 0.5, 0.5] + [x - 1.0 for x in al[3:]]
    scale = abs(sc.multiplier) * k
    return IndexField(
        chart=chart,
        modulus=m,
        centers=np.ascontiguousarray(centers, dtype=float),
        exponents=np.ascontiguousarray(exps, dtype=float),
        scale=float(scale),
        catalog=tuple(_catalog(chart, m, exps)),
    )


def _catalog(chart: ConformalChart, m: EllipticModulus, exps) -> list[SingularPoint]:
    a, b = m.a, m.b
    pts = [
        SingularPoint("R1", "corner", complex(-a, b), exps[0], 2 * exps[0], center=-1.0 / m.k),
        SingularPoint("R2", "corner", complex(-a, 0.0), exps[1], 2 * exps[1], center=-1.0),
        SingularPoint("R3", "corner", complex(a, 0.0), exps[2], 2 * exps[2], center=1.0),
        SingularPoint("R4", "corner", complex(a, b), exps[3], 2 * exps[3], center=1.0 / m.k),
        SingularPoint("D", "pole", complex(0.0, b), 0.0, 0.0, twin="D'"),
        SingularPoint("D'", "pole", complex(2 * a, b), 0.0, 0.0, twin="D"),
    ]
    sides = chart.vertex_sides()
    for idx, (a_i, side) in enumerate(zip(chart.sc.prevertices[3:], sides), start=3):
        e = exps[idx + 1]
        w = incomplete_F(complex(a_i, 0.0), m)
        label = _vertex_label(idx)
        if side == "top":
            loc, twin_loc = complex(w.real, b), complex(2 * a - w.real, b)
        else:
            loc, twin_loc = complex(a, w.imag), complex(a, 2 * b - w.imag)
        w_exp = 2 * e if side == "corner" else e
        pts.append(SingularPoint(label, "vertex", loc, e, w_exp, label + "'", idx, side, float(a_i)))
        pts.append(SingularPoint(label + "'", "vertex", twin_loc, e, w_exp, label, idx, side, float(a_i)))
    return pts


class AnalyticExampleField:
    """Index ``n = 1/|w|`` produced by ``w = i exp(-z)`` from a square of constant index.

    ``square`` is the lower-left corner and side of the billiard square in
    the z-plane; the default keeps ``Re z >= 0`` so that ``n >= 1`` on the
    image and the origin is never reached.
    """

    periodic = False
    # nominal length scale for guards and step sizes; the plane has no lattice
    a = b = 1.0

    def __init__(self, corner: complex = complex(0.2, 0.2), side: float = 1.0):
        self.corner = complex(corner)
        self.side = float(side)
        c = self.corner
        self.square = make_polygon([c, c + side, c + side + 1j * side, c + 1j * side])
        self.catalog = (SingularPoint("O", "pole", 0j, -1.0, -1.0),)

    @staticmethod
    def forward(z: complex) -> complex:
        return 1j * cmath.exp(-complex(z))

    @staticmethod
    def inverse(w: complex) -> complex:
        return -cmath.log(-1j * complex(w))

    @staticmethod
    def derivative(z: complex) -> complex:
        """``dw/dz``."""
        return -1j * cmath.exp(-complex(z))

    def index_at(self, w: complex) -> float:
        r = abs(complex(w))
        if r == 0.0:
            raise SingularEvaluation(self.catalog[0], math.inf)
        return 1.0 / r

    def extended_index_at(self, u: float, v: float) -> float:
        return self.index_at(complex(u, v))

    def potential_at(self, u: float, v: float) -> float:
        return -0.5 * self.index_at(complex(u, v)) ** 2

    def log_index(self, u: float, v: float) -> float:
        return -0.5 * math.log(u * u + v * v)

    def index_and_log_gradient(self, u: float, v: float) -> tuple[float, float, float]:
        r2 = u * u + v * v
        return 1.0 / math.sqrt(r2), -u / r2, -v / r2

    def puncture_distance(self, u: float, v: float) -> tuple[float, SingularPoint]:
        return math.hypot(u, v), self.catalog[0]

    def singular_catalog(self) -> list[SingularPoint]:
        return list(self.catalog)


def analytic_example_field(corner: complex = complex(0.2, 0.2), side: float = 1.0) -> AnalyticExampleField:
    return AnalyticExampleField(corner, side)


def harmonicity_residual(field, h: float, center: complex, radius: float) -> float:
    """Max of the five-point Laplacian of ``ln n`` over grid points in a disk.

    Grid points are ``center + h (i + 1j j)``; every stencil point must stay
    ``HARMONIC_EXCLUSION * h`` away from the field's punctures.
    """
    center = complex(center)
    m = int(math.floor(radius / h))
    idx = np.arange(-m - 1, m + 2)
    U = center.real + h * idx
    V = center.imag + h * idx
    L = np.array([[field.log_index(u, v) for u in U] for v in V])
    lap = (L[1:-1, 2:] + L[1:-1, :-2] + L[2:, 1:-1] + L[:-2, 1:-1] - 4.0 * L[1:-1, 1:-1]) / (h * h)
    ii, jj = np.meshgrid(idx[1:-1], idx[1:-1])
    mask = (ii * ii + jj * jj) * h * h <= radius * radius
    excl = HARMONIC_EXCLUSION * h
    for j, i in zip(*np.nonzero(mask)):
        u, v = U[i + 1], V[j + 1]
        d, p = field.puncture_distance(u, v)
        if d < excl + h:
            raise DomainError(f"harmonicity region comes within {d:.3g} of puncture {p.label}")
    return float(np.max(np.abs(lap[mask])))
