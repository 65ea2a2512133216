"""Schwarz-Christoffel charts: half-plane -> polygon, half-plane -> rectangle, polygon -> rectangle.

The half-plane map onto the polygon is

    f(eta) = z0 + A * integral prod_i (zeta - a_i)^(alpha_i - 1) dzeta

with prevertices normalised to ``a_1 = -1/k, a_2 = -1, a_3 = 1`` and the
remaining ``a_4 < ... < a_n`` found by matching side-length ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .elliptic import EllipticModulus, dF_deta, incomplete_F, jacobi_sn
from .errors import CrowdingError, DomainError, InversionError, SCSolveError
from .polygon import VERTEX_GUARD, Polygon, make_polygon
from .quadrature import gauss_jacobi, gauss_legendre

N_JACOBI = 20
N_LEGENDRE = 16
MAX_PANELS = 4000
CROWDING_GAP = 1e-12
VERTEX_TOL = 1e-6  # vertex reproduction, times the diameter
SOLVE_TOL = 1e-13
DEFAULT_K = 1.0 / math.sqrt(2.0)


class SCIntegrator:
    """Singularity-aware quadrature of ``prod (zeta - a_i)^beta_i`` along straight paths."""

    def __init__(self, prevertices, exponents):
        self.prevertices = np.ascontiguousarray(prevertices, dtype=float)
        self.exponents = np.ascontiguousarray(exponents, dtype=float)
        n = len(self.prevertices)
        self._others = []
        for j in range(n):
            keep = np.arange(n) != j
            self._others.append(
                (
                    np.ascontiguousarray(self.prevertices[keep]),
                    np.ascontiguousarray(self.exponents[keep]),
                    float(np.min(np.abs(self.prevertices[keep] - self.prevertices[j]))),
                )
            )

    def integrand(self, zeta):
        return kernels.sc_factors(zeta, self.prevertices, self.exponents)

    def from_prevertex(self, j: int, end: complex) -> complex:
        """Integral from prevertex ``a_j`` to ``end`` along the straight segment."""
        aj = self.prevertices[j]
        d = complex(end) - aj
        L = abs(d)
        if L == 0.0:
            return 0j
        theta = math.atan2(max(d.imag, 0.0), d.real)
        dirn = complex(math.cos(theta), math.sin(theta))
        pv, ex, dmin = self._others[j]
        beta = float(self.exponents[j])
        h = min(L, 0.5 * dmin)
        t, w = gauss_jacobi(N_JACOBI, 0.0, beta)
        zeta = aj + 0.5 * (t + 1.0) * h * dirn
        rest = kernels.sc_factors(zeta, pv, ex)
        total = complex(np.dot(w, rest)) * (0.5 * h) ** (beta + 1.0) * complex(
            math.cos((beta + 1.0) * theta), math.sin((beta + 1.0) * theta)
        )
        if h < L:
            total += self.regular(aj + h * dirn, end)
        return total

    def regular(self, p: complex, q: complex) -> complex:
        """Integral over a segment that stays away from every prevertex.

        Panels are graded so each is no longer than its start's distance to
        the nearest prevertex.
        """
        p, q = complex(p), complex(q)
        L = abs(q - p)
        if L == 0.0:
            return 0j
        dirn = (q - p) / L
        starts, lengths = [], []
        done = 0.0
        while done < L:
            z = p + done * dirn
            dist = float(np.min(np.hypot(z.real - self.prevertices, z.imag)))
            last = dist >= L - done
            step = L - done if last else dist
            if step <= 1e-15 * L or len(starts) > MAX_PANELS:
                raise DomainError(f"quadrature path passes through a prevertex near {z}")
            starts.append(done)
            lengths.append(step)
            if last:
                break
            done += step
        x, w = gauss_legendre(N_LEGENDRE)
        s = np.asarray(starts)[:, None] + 0.5 * (x[None, :] + 1.0) * np.asarray(lengths)[:, None]
        vals = self.integrand(p + s * dirn)
        return complex(np.sum(vals * w[None, :] * (0.5 * np.asarray(lengths))[:, None])) * dirn

    def side(self, j: int) -> complex:
        """Integral between consecutive prevertices ``a_j`` and ``a_{j+1}``."""
        a, b = self.prevertices[j], self.prevertices[j + 1]
        mid = complex(0.5 * (a + b), 0.0)
        return self.from_prevertex(j, mid) - self.from_prevertex(j + 1, mid)


@dataclass(frozen=True, eq=False)
class SCChart:
    """Evaluable half-plane -> polygon map.

    ``target`` is the polygon relabelled so its vertex 0 is the pivot
    (the image of ``a_1 = -1/k``).
    """

    prevertices: np.ndarray
    exponents: np.ndarray
    multiplier: complex
    offset: complex
    target: Polygon
    k: float
    pivot: int
    polygon: Polygon
    vertex_images: np.ndarray = field(repr=False)
    _integrator: SCIntegrator = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.prevertices)

    @property
    def modulus(self) -> EllipticModulus:
        return EllipticModulus.from_k(self.k)

    def vertex_residual(self) -> float:
        """Max vertex mismatch relative to the diameter."""
        return float(np.max(np.abs(self.vertex_images - self.target.vertices)) / self.target.diameter)

    def to_dict(self) -> dict:
        return {
            "polygon": self.polygon.to_dict()["vertices"],
            "k": self.k,
            "pivot": self.pivot,
            "prevertices": [float(a) for a in self.prevertices],
            "exponents": [float(e) for e in self.exponents],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "offset": [self.offset.real, self.offset.imag],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SCChart":
        """Rebuild a chart from stored parameters without re-solving."""
        poly = make_polygon(data["polygon"])
        A = complex(*data["multiplier"])
        z0 = complex(*data["offset"])
        return _assemble(
            poly,
            float(data["k"]),
            int(data["pivot"]),
            np.asarray(data["prevertices"], dtype=float),
            np.asarray(data["exponents"], dtype=float),
            A,
            z0,
        )


def _assemble(poly, k, pivot, prevertices, exponents, A, z0) -> SCChart:
    integ = SCIntegrator(prevertices, exponents)
    raw = np.zeros(len(prevertices), dtype=complex)
    for j in range(len(prevertices) - 1):
        raw[j + 1] = raw[j] + integ.side(j)
    images = z0 + A * raw
    return SCChart(
        prevertices=integ.prevertices,
        exponents=integ.exponents,
        multiplier=A,
        offset=z0,
        target=poly.rotated(pivot),
        k=k,
        pivot=pivot,
        polygon=poly,
        vertex_images=images,
        _integrator=integ,
    )


def _prevertices_from_gaps(y, k) -> np.ndarray:
    tail = 1.0 + np.cumsum(np.exp(y))
    return np.concatenate(([-1.0 / k, -1.0, 1.0], tail))


def _side_residual(y, k, betas, log_targets) -> np.ndarray:
    pv = _prevertices_from_gaps(y, k)
    integ = SCIntegrator(pv, betas)
    logs = np.array([math.log(abs(integ.side(j))) for j in range(len(pv) - 2)])
    return (logs[1:] - logs[0]) - log_targets


def _newton(fun, y0, tol=SOLVE_TOL, maxiter=60):
    y = np.array(y0, dtype=float)
    r = fun(y)
    for _ in range(maxiter):
        if not np.all(np.isfinite(r)):
            break
        if np.max(np.abs(r)) < tol:
            return y, r, True
        m = len(y)
        J = np.empty((m, m))
        for i in range(m):
            h = 1e-6 * max(1.0, abs(y[i]))
            e = np.zeros(m)
            e[i] = h
            J[:, i] = (fun(y + e) - fun(y - e)) / (2 * h)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
        # cap the step in log-gap space
        big = np.max(np.abs(step))
        if big > 3.0:
            step *= 3.0 / big
        norm0 = np.linalg.norm(r)
        lam = 1.0
        while lam > 1e-6:
            y_try = y + lam * step
            r_try = fun(y_try)
            if np.all(np.isfinite(r_try)) and np.linalg.norm(r_try) < (1 - 1e-4 * lam) * norm0:
                break
            lam *= 0.5
        else:
            return y, r, np.max(np.abs(r)) < tol
        y, r = y_try, r_try
    return y, r, bool(np.all(np.isfinite(r)) and np.max(np.abs(r)) < tol)


def _cross_ratio(p, q, r, s):
    return ((r - p) * (s - q)) / ((r - q) * (s - p))


def _renormalize(x: np.ndarray, k: float) -> np.ndarray:
    """Moebius image of prevertices ``x`` sending x_1, x_2, x_3 to -1/k, -1, 1."""
    c = 1.0 + 1.0 / k
    out = np.empty_like(x)
    out[:3] = (-1.0 / k, -1.0, 1.0)
    for j in range(3, len(x)):
        lam = _cross_ratio(x[0], x[1], x[2], x[j])
        out[j] = (c - 2.0 * lam / k) / (2.0 * lam - c)
    return out


def _k_limit(x: np.ndarray) -> float:
    # at k = k_max the preimage of infinity reaches the last prevertex
    lam = _cross_ratio(x[0], x[1], x[2], x[-1])
    return 1.0 / (2.0 * lam - 1.0)


def _solve_gaps(target: Polygon, k: float, guesses):
    n = target.n
    betas = target.alphas - 1.0
    lengths = target.edge_lengths()
    log_targets = np.log(lengths[1 : n - 2]) - math.log(lengths[0])

    def fun(y):
        return _side_residual(y, k, betas, log_targets)

    best = None
    for y0 in guesses:
        try:
            y, r, ok = _newton(fun, y0)
        except DomainError:
            continue
        if best is None or np.max(np.abs(r)) < np.max(np.abs(best[1])):
            best = (y, r)
        if ok:
            return y, r, True
    return (None, None, False) if best is None else (best[0], best[1], False)


def admissible_k_max(p: Polygon, pivot: int = 0) -> float:
    """Supremum of the moduli k for which the normalised chart exists.

    For ``k >= k_max`` the point of the polygon that must map to the sn pole
    falls outside the side ``P_n P_1``, so no ordered prevertices
    ``1 < a_4 < ... < a_n`` exist. Triangles admit every k.
    """
    if p.n == 3:
        return 1.0
    target = p.rotated(pivot)
    for k0 in (0.05, 0.01, 2e-3):
        y, r, ok = _solve_gaps(target, k0, _initial_guesses(target, k0))
        if ok:
            return _k_limit(_prevertices_from_gaps(y, k0))
    raise SCSolveError("could not bracket the admissible modulus range")


def solve_parameters(p: Polygon, k: float = DEFAULT_K, pivot: int = 0) -> SCChart:
    """Solve the accessory-parameter problem for polygon ``p``.

    Raises :class:`SCSolveError` (with the residual vector) when no start
    converges or ``k`` is not admissible for this polygon and pivot, and
    :class:`CrowdingError` when prevertices collapse.
    """
    EllipticModulus.from_k(k)  # range check
    n = p.n
    if not 0 <= pivot < n:
        raise DomainError(f"pivot {pivot} out of range for {n} vertices")
    target = p.rotated(pivot)
    betas = target.alphas - 1.0
    if n == 3:
        pv = np.array([-1.0 / k, -1.0, 1.0])
    else:
        y, r, ok = _solve_gaps(target, k, _initial_guesses(target, k))
        if not ok:
            # solve where the problem is always benign, then carry the
            # prevertices over by the Moebius renormalisation
            for k0 in (0.05, 0.01, 2e-3):
                y0, _, ok0 = _solve_gaps(target, k0, _initial_guesses(target, k0))
                if ok0:
                    x0 = _prevertices_from_gaps(y0, k0)
                    kmax = _k_limit(x0)
                    if k >= kmax:
                        raise SCSolveError(
                            f"k = {k} is not admissible for this polygon and pivot (need k < {kmax:.12g})", r
                        )
                    x = _renormalize(x0, k)
                    guess = np.log(np.diff(np.concatenate(([1.0], x[3:]))))
                    y, r, ok = _solve_gaps(target, k, [guess])
                    break
        # a failed solve that was driving prevertices together is crowding
        if y is not None:
            _check_crowding(_prevertices_from_gaps(y, k), r)
        if not ok:
            raise SCSolveError("parameter problem did not converge", r)
        pv = _prevertices_from_gaps(y, k)

    integ = SCIntegrator(pv, betas)
    first = integ.side(0)
    A = (target.vertices[1] - target.vertices[0]) / first
    chart = _assemble(p, k, pivot, pv, betas, complex(A), complex(target.vertices[0]))
    res = chart.vertex_residual()
    if res > VERTEX_TOL:
        raise SCSolveError(f"vertex reproduction residual {res:.3e} exceeds {VERTEX_TOL}")
    return chart


def _check_crowding(pv: np.ndarray, residual) -> None:
    gaps = np.diff(pv) / np.maximum(1.0, np.abs(pv[1:]))
    if np.min(gaps) < CROWDING_GAP:
        raise CrowdingError(
            f"prevertex crowding (min relative gap {np.min(gaps):.2e}); try another pivot or k", residual
        )


def _initial_guesses(target: Polygon, k: float):
    n = target.n
    m = n - 3
    # prevertices spread in proportion to the remaining perimeter
    lengths = target.edge_lengths()
    frac = lengths[2 : n - 1] / lengths.sum()
    yield np.log(np.maximum(frac * 4.0 * n / k, 1e-3))
    for g in (0.5 / k, 0.2, 2.0 / k, 0.05, 8.0 / k):
        yield np.full(m, math.log(g))


def eval_halfplane_to_polygon(c: SCChart, eta: complex) -> complex:
    eta = complex(eta)
    if eta.imag < 0.0:
        raise DomainError(f"eta must lie in the closed upper half-plane, got {eta!r}")
    j = int(np.argmin(np.abs(eta - c.prevertices)))
    return complex(c.vertex_images[j] + c.multiplier * c._integrator.from_prevertex(j, eta))


def sc_derivative(c: SCChart, eta: complex) -> complex:
    """``dz/deta`` of the polygon map."""
    return complex(c.multiplier * kernels.sc_factors(np.array([complex(eta)]), c.prevertices, c.exponents)[0])


def eval_halfplane_to_rectangle(m: EllipticModulus, eta: complex) -> complex:
    return incomplete_F(eta, m)


def _anchors(c: SCChart):
    pv = c.prevertices
    pts = [1j]
    for a, b in zip(pv[:-1], pv[1:]):
        pts.append(complex(0.5 * (a + b), 0.5 * (b - a)))
    pts.append(complex(pv[-1], pv[-1] - pv[-2] + 1.0))
    pts.append(complex(pv[0], pv[1] - pv[0] + 1.0))
    return pts


def _segment_inside(p: Polygon, z0: complex, z1: complex, samples: int = 24) -> bool:
    return all(p.contains(z0 + t * (z1 - z0)) for t in np.linspace(0.0, 1.0, samples)[1:-1])


def _continuation(c: SCChart, eta: complex, z_from: complex, z: complex, steps: int = 24) -> complex:
    dz = (z - z_from) / steps
    for _ in range(steps):

        def rate(e):
            return dz / sc_derivative(c, complex(e.real, max(e.imag, 0.0)))

        k1 = rate(eta)
        k2 = rate(eta + 0.5 * k1)
        k3 = rate(eta + 0.5 * k2)
        k4 = rate(eta + k3)
        eta = eta + (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        eta = complex(eta.real, max(eta.imag, 0.0))
    return eta


def _newton_invert(c: SCChart, z: complex, eta: complex, tol: float, maxiter: int = 60):
    scale = c.target.diameter
    res = eval_halfplane_to_polygon(c, eta) - z
    for _ in range(maxiter):
        if abs(res) <= tol * scale:
            return eta, abs(res)
        step = -res / sc_derivative(c, eta)
        lam = 1.0
        while True:
            trial = eta + lam * step
            trial = complex(trial.real, max(trial.imag, 0.0))
            try:
                r_new = eval_halfplane_to_polygon(c, trial) - z
            except DomainError:
                r_new = None
            if r_new is not None and abs(r_new) < abs(res):
                break
            lam *= 0.5
            if lam < 1e-10:
                return eta, abs(res)
        eta, res = trial, r_new
    return eta, abs(res)


def invert_polygon_map(c: SCChart, z: complex, guess: complex | None = None, tol: float = 1e-13,
                       boundary: bool = False) -> complex:
    """``eta`` with ``f(eta) = z``: damped Newton from ``guess`` or from ODE continuation.

    Interior points only unless ``boundary`` is set (then the solution may
    lie on the real axis).
    """
    z = complex(z)
    tgt = c.target
    guard = VERTEX_GUARD * tgt.diameter
    if np.min(np.abs(tgt.vertices - z)) < guard:
        raise DomainError(f"{z} lies within the vertex exclusion radius")
    if not boundary and not tgt.contains(z):
        raise DomainError(f"{z} is not strictly inside the polygon")
    accept = 1e-9
    best = (None, math.inf)
    if guess is not None:
        eta, r = _newton_invert(c, z, complex(guess), tol)
        if r <= accept * tgt.diameter:
            return eta
        best = (eta, r)
    anchors = sorted(
        ((abs(eval_halfplane_to_polygon(c, a) - z), a) for a in _anchors(c)), key=lambda t: t[0]
    )
    for _, a in anchors:
        za = eval_halfplane_to_polygon(c, a)
        if not _segment_inside(tgt, za, z if not boundary else za + 0.999 * (z - za)):
            continue
        eta0 = _continuation(c, a, za, z)
        eta, r = _newton_invert(c, z, eta0, tol)
        if r <= accept * tgt.diameter:
            return eta
        if r < best[1]:
            best = (eta, r)
    raise InversionError(f"could not invert the polygon map at {z}", best[1])


@dataclass(frozen=True, eq=False)
class ConformalChart:
    """Polygon -> rectangle map ``h = g o f^-1`` with its inverse."""

    sc: SCChart
    modulus: EllipticModulus

    @property
    def pivot(self) -> int:
        return self.sc.pivot

    def eta_of(self, z: complex, guess: complex | None = None, boundary: bool = False) -> complex:
        return invert_polygon_map(self.sc, z, guess, boundary=boundary)

    def forward(self, z: complex, guess: complex | None = None) -> complex:
        return incomplete_F(self.eta_of(z, guess), self.modulus)

    def inverse(self, w: complex) -> complex:
        eta = jacobi_sn(w, self.modulus).value
        return eval_halfplane_to_polygon(self.sc, complex(eta.real, max(eta.imag, 0.0)))

    def derivative_at_eta(self, eta: complex) -> complex:
        """``dw/dz`` expressed through the half-plane point."""
        return dF_deta(eta, self.modulus) / sc_derivative(self.sc, eta)

    def vertex_images(self) -> list[complex]:
        return [incomplete_F(complex(a, 0.0), self.modulus) for a in self.sc.prevertices]

    def vertex_sides(self) -> list[str]:
        """Rectangle side receiving each polygon vertex beyond the third."""
        inv_k = 1.0 / self.modulus.k
        out = []
        for a in self.sc.prevertices[3:]:
            if abs(a - inv_k) <= 1e-9 * inv_k:
                out.append("corner")
            else:
                out.append("right" if a < inv_k else "top")
        return out

    def to_dict(self) -> dict:
        return self.sc.to_dict()

    @classmethod
    def from_dict(cls, data: dict) -> "ConformalChart":
        sc = SCChart.from_dict(data)
        return cls(sc, EllipticModulus.from_k(sc.k))


def build_chart(p: Polygon, k: float = DEFAULT_K, pivot: int = 0) -> ConformalChart:
    sc = solve_parameters(p, k, pivot)
    return ConformalChart(sc, EllipticModulus.from_k(k))


def rectangle_polygon(k: float, scale: float = 1.0, origin: complex = 0j) -> Polygon:
    """Rectangle whose first side (height) and second side (width) match R = [-a, a] x [0, b]."""
    m = EllipticModulus.from_k(k)
    w, h = 2.0 * m.a * scale, m.b * scale
    o = complex(origin)
    # P1 -> R1 (top-left), P2 -> R2, P3 -> R3, P4 -> R4 under a similarity
    return make_polygon([o + 1j * h, o, o + w, o + w + 1j * h])


def square_matching_k() -> float:
    """Modulus with K(k') = 2 K(k), making R a 2:1 box so a square maps by a similarity.

    This is the singular value k = (sqrt(2) - 1)^2.
    """
    return 3.0 - 2.0 * math.sqrt(2.0)
