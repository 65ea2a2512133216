"""Light rays in a flat index field: Newtonian integration, transport and unfolding.

A ray ``x(s)`` obeys ``x'' = grad(n^2 / 2)`` with ``|x'| = n``, so the energy
``E = |x'|^2 / 2 - n^2 / 2`` stays 0. The optical length ``L`` (``dL/ds = n^2``)
equals the Euclidean length of the corresponding billiard path in the polygon,
which makes it the natural common parameter of mapped and integrated rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import DomainError, IncomparableCurves, SingularEvaluation
from .field import fold_to_rectangle
from .polygon import PolygonalTrajectory, as_point
from .quadrature import gauss_legendre

GUARD = 1e-4  # dynamics puncture guard, times min(a, b)
RTOL = 1e-12
ATOL = 1e-12
ENERGY_RATE = 1e-10  # allowed |dE| per unit of s before a step is rejected
MAX_STEPS = 200_000

# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


class WrapEvent(NamedTuple):
    s: float
    cell_from: tuple[int, int]
    cell_to: tuple[int, int]


class SideBounce(NamedTuple):
    index: int  # first sample after the reflection
    side: str  # "left", "right", "bottom" or "top"
    point: complex


@dataclass
class CurvedTrajectory:
    """Sampled ray. ``velocity`` is ``dx/ds``, so ``|velocity| = n`` and ``dx/dL = velocity / n^2``.

    ``frame`` is "plane" (unfolded, torus lattice ``lattice``) or "rectangle".
    Mapped trajectories have no stepping parameter and carry ``s = nan``.
    """

    kind: str
    frame: str
    s: np.ndarray
    x: np.ndarray
    velocity: np.ndarray
    index: np.ndarray
    L: np.ndarray
    sigma: np.ndarray
    lattice: tuple[float, float]
    rect: tuple[float, float]
    wraps: list[WrapEvent] = dc_field(default_factory=list)
    bounces: list[SideBounce] = dc_field(default_factory=list)
    gaps: list[int] = dc_field(default_factory=list)
    tangent_jumps: list[float] = dc_field(default_factory=list)
    status: str = "ok"
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def energy(self) -> np.ndarray:
        return 0.5 * np.abs(self.velocity) ** 2 - 0.5 * self.index**2

    @property
    def speed_ratio(self) -> np.ndarray:
        return np.abs(self.velocity) / self.index

    @property
    def end(self) -> tuple[complex, complex]:
        return complex(self.x[-1]), complex(self.velocity[-1])

    def at(self, L) -> np.ndarray:
        """Positions at optical lengths ``L`` (cubic Hermite in L)."""
        q = _spline(*_param(self, "optical"))(np.asarray(L, dtype=float))
        return q[..., 0] + 1j * q[..., 1]

    def torus_points(self) -> np.ndarray:
        """Positions reduced to the fundamental domain [-a, 3a) x [0, 2b)."""
        a = self.rect[0]
        W, H = self.lattice
        return ((self.x.real + a) % W - a) + 1j * (self.x.imag % H)

    def to_dict(self) -> dict:
        def c2(z):
            return [[float(p.real), float(p.imag)] for p in z]

        return {
            "kind": self.kind,
            "frame": self.frame,
            "status": self.status,
            "s": [None if math.isnan(v) else float(v) for v in self.s],
            "x": c2(self.x),
            "velocity": c2(self.velocity),
            "index": self.index.tolist(),
            "L": self.L.tolist(),
            "sigma": self.sigma.tolist(),
            "energy": self.energy.tolist(),
            "wraps": [[w.s, list(w.cell_from), list(w.cell_to)] for w in self.wraps],
            "bounces": [[b.index, b.side, [b.point.real, b.point.imag]] for b in self.bounces],
            "gaps": list(self.gaps),
            "tangent_jumps": list(self.tangent_jumps),
            "diagnostics": self.diagnostics,
        }

    def to_csv(self) -> str:
        rows = ["s,u,v,du_ds,dv_ds,n,L,sigma,E"]
        for i in range(len(self.x)):
            vals = (self.s[i], self.x[i].real, self.x[i].imag, self.velocity[i].real, self.velocity[i].imag,
                    self.index[i], self.L[i], self.sigma[i], self.energy[i])
            rows.append(",".join(repr(float(v)) for v in vals))
        return "\n".join(rows) + "\n"


def _rhs(field):
    def f(y):
        n, gu, gv = field.index_and_log_gradient(y[0], y[1])
        n2 = n * n
        return np.array([y[2], y[3], n2 * gu, n2 * gv, n2, math.hypot(y[2], y[3])]), n

    return f


def _step(f, y, h, k1):
    ks = [k1]
    n = None
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks) if a)
        k, n = f(yi)
        ks.append(k)
    # the last stage sits at the new point (first same as last)
    err = h * sum(e * k for e, k in zip(_E, ks))
    return yi, err, ks[-1], n


def _cell(x: complex, a: float, b: float) -> tuple[int, int]:
    return int(math.floor((x.real + a) / (4.0 * a))), int(math.floor(x.imag / (2.0 * b)))


def _crossing_time(s0, s1, p, q, c0, c1, a, b) -> float:
    # linear estimate of when the chord p -> q leaves cell c0
    fr = []
    if c1[0] != c0[0]:
        edge = -a + 4.0 * a * max(c0[0], c1[0])
        fr.append((edge - p.real) / (q.real - p.real))
    if c1[1] != c0[1]:
        edge = 2.0 * b * max(c0[1], c1[1])
        fr.append((edge - p.imag) / (q.imag - p.imag))
    return s0 + min(fr) * (s1 - s0)


def _chord_distance(p: complex, q: complex, c: complex) -> float:
    d = q - p
    t = 0.0 if d == 0 else min(1.0, max(0.0, ((c - p) * d.conjugate()).real / abs(d) ** 2))
    return abs(p + t * d - c)


def _side_crossings(x: complex, a: float, b: float) -> list[tuple[str, float]]:
    out = []
    if x.real > a:
        out.append(("right", a))
    if x.real < -a:
        out.append(("left", -a))
    if x.imag > b:
        out.append(("top", b))
    if x.imag < 0.0:
        out.append(("bottom", 0.0))
    return out


def _event_root(g, h_hi, tol):
    """Step length in (0, h_hi] at which the event function g changes sign."""
    return brentq(g, 0.0, h_hi, xtol=tol, rtol=4 * np.finfo(float).eps)


def integrate_geodesic(
    field,
    x0,
    dir0,
    s_max: float | None = None,
    L_target: float | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
    energy_rate: float = ENERGY_RATE,
    guard: float = GUARD,
    h0: float | None = None,
    max_steps: int = MAX_STEPS,
    box: bool = False,
) -> CurvedTrajectory:
    """Integrate ``x'' = grad(n_e^2 / 2)`` from ``x0`` with ``x'(0) = n_e(x0) dir0 / |dir0|``.

    Stops at ``s_max`` or when the optical length reaches ``L_target``
    (whichever comes first), landing on the target with a shortened final
    step. With ``box`` the ray is kept in the rectangle by specular
    reflection at its sides (see :func:`reflect_in_rectangle`); otherwise it
    runs in the unfolded plane and lattice-cell changes are logged as wraps.
    """
    if s_max is None and L_target is None:
        raise DomainError("give s_max or L_target")
    x0, d0 = as_point(x0), as_point(dir0)
    if d0 == 0:
        raise DomainError("direction must be nonzero")
    a, b = field.a, field.b
    periodic = getattr(field, "periodic", True)
    gr = guard * min(a, b)
    dist, p = field.puncture_distance(x0.real, x0.imag)
    if dist < gr:
        raise SingularEvaluation(p, None)
    if box and not (-a <= x0.real <= a and 0.0 <= x0.imag <= b):
        raise DomainError(f"start point {x0} is outside the rectangle")
    f = _rhs(field)
    n0, _, _ = field.index_and_log_gradient(x0.real, x0.imag)
    v0 = n0 * d0 / abs(d0)
    y = np.array([x0.real, x0.imag, v0.real, v0.imag, 0.0, 0.0])
    k1, n_cur = f(y)
    s = 0.0
    s_end = math.inf if s_max is None else float(s_max)
    L_end = math.inf if L_target is None else float(L_target)
    scale = max(a, b)
    h = h0 if h0 is not None else 1e-3 * scale / max(n0, 1e-3)
    h_min = 1e-14 * scale

    S, Y, N = [0.0], [y.copy()], [n_cur]
    wraps: list[WrapEvent] = []
    bounces: list[SideBounce] = []
    status = "ok"
    diagnostics: dict = {}
    cell = _cell(x0, a, b)
    E_cur = 0.5 * (y[2] ** 2 + y[3] ** 2) - 0.5 * n_cur**2

    def energy(yy, nn):
        return 0.5 * (yy[2] ** 2 + yy[3] ** 2) - 0.5 * nn * nn

    steps = 0
    while s < s_end and y[4] < L_end:
        if steps >= max_steps:
            status = "max_steps"
            break
        h = min(h, s_end - s)
        y_new, err, k7, n7 = _step(f, y, h, k1)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        enorm = float(np.max(np.abs(err) / sc))
        n_new = None
        if enorm <= 1.0:
            n_new = n7
            # n loses relative accuracy like eps * size / distance near a puncture
            floor = n_new * n_new * max(1e-13, 1e-15 * min(a, b) / max(dist, gr))
            if not math.isfinite(n_new) or abs(energy(y_new, n_new) - E_cur) > max(1e-13 + floor, energy_rate * h):
                n_new = None
                enorm = max(enorm, 1.0)
        if n_new is None:
            h *= max(0.2, 0.9 * enorm ** -0.2) if enorm > 1.0 else 0.5
            if h < h_min:
                status = "step_underflow"
                nn, gu, gv = field.index_and_log_gradient(y[0], y[1])
                diagnostics = {"u": y[0], "v": y[1], "n": nn, "grad_ln_n": [gu, gv], "h": h}
                break
            continue
        steps += 1
        h_taken = h
        event = None
        # events inside the step: side crossing (box mode) and the optical-length target
        if box:
            hits = _side_crossings(complex(y_new[0], y_new[1]), a, b)
            best = None
            for side, c in hits:
                comp = 0 if side in ("left", "right") else 1
                g = lambda hh, comp=comp, c=c: _step(f, y, hh, k1)[0][comp] - c  # noqa: E731
                hs = _event_root(g, h, 1e-15 * scale)
                if best is None or hs < best[0]:
                    best = (hs, side, comp, c)
            if best is not None:
                h_taken = best[0]
                event = ("bounce",) + best[1:]
        y_try = _step(f, y, h_taken, k1)[0] if h_taken != h else y_new
        if y_try[4] > L_end:
            g = lambda hh: _step(f, y, hh, k1)[0][4] - L_end  # noqa: E731
            h_taken = _event_root(g, h_taken, 1e-15 * max(1.0, L_end))
            y_try = _step(f, y, h_taken, k1)[0]
            y_try[4] = L_end
            event = ("target",)
        if h_taken != h or event:
            k1, n_new = f(y_try)
        else:
            k1 = k7
        y = y_try
        s += h_taken
        E_cur = energy(y, n_new)
        xp = complex(Y[-1][0], Y[-1][1])
        xn = complex(y[0], y[1])
        S.append(s)
        Y.append(y.copy())
        N.append(n_new)
        if event and event[0] == "bounce":
            _, side, comp, c = event
            y[comp] = c
            y[comp + 2] = -y[comp + 2]
            k1, n_new = f(y)
            S.append(s)
            Y.append(y.copy())
            N.append(n_new)
            bounces.append(SideBounce(len(S) - 1, side, complex(y[0], y[1])))
        if periodic and not box:
            new_cell = _cell(xn, a, b)
            if new_cell != cell:
                wraps.append(WrapEvent(_crossing_time(S[-2], s, xp, xn, cell, new_cell, a, b), cell, new_cell))
                cell = new_cell
        # guard disks: check the chord of the step against the nearest puncture
        dist, p = field.puncture_distance(xn.real, xn.imag)
        if dist < gr + abs(xn - xp):
            uf, vf, _, _ = fold_to_rectangle(xn.real, xn.imag, a, b)
            up, vp, _, _ = fold_to_rectangle(xp.real, xp.imag, a, b)
            chord = _chord_distance(complex(up, vp), complex(uf, vf), p.location)
            if min(dist, chord) < gr:
                status = "singular_approach"
                diagnostics = {"puncture": p.label, "distance": min(dist, chord)}
                break
        if event and event[0] == "target":
            break
        h = h * min(5.0, max(0.2, 0.9 * max(enorm, 1e-10) ** -0.2)) if h_taken == h else max(h, h_taken)

    Y = np.array(Y)
    return CurvedTrajectory(
        kind="reflected" if box else "integrated",
        frame="rectangle" if box else "plane",
        s=np.array(S),
        x=Y[:, 0] + 1j * Y[:, 1],
        velocity=Y[:, 2] + 1j * Y[:, 3],
        index=np.array(N),
        L=Y[:, 4],
        sigma=Y[:, 5],
        lattice=(4.0 * a, 2.0 * b),
        rect=(a, b),
        wraps=wraps,
        bounces=bounces,
        status=status,
        diagnostics=diagnostics,
    )


def reflect_in_rectangle(field, x0, dir0, **kw) -> CurvedTrajectory:
    """Ray confined to R by mirror sides; bounces are located to rounding and logged."""
    return integrate_geodesic(field, x0, dir0, box=True, **kw)


def _mirror(side: str, a: float, b: float) -> tuple[int, float, int, float]:
    # (su, tu, sv, tv) of the reflection in the given side
    if side == "right":
        return -1, 2 * a, 1, 0.0
    if side == "left":
        return -1, -2 * a, 1, 0.0
    if side == "top":
        return 1, 0.0, -1, 2 * b
    return 1, 0.0, -1, 0.0


def unfold_to_torus(t: CurvedTrajectory) -> CurvedTrajectory:
    """Undo the side reflections of a rectangle trajectory, giving a smooth plane curve.

    ``tangent_jumps`` holds the angle between the unfolded incoming and
    outgoing tangents at each former bounce.
    """
    if t.frame == "plane":
        return t
    a, b = t.rect
    su, tu, sv, tv = 1, 0.0, 1, 0.0
    x = t.x.copy()
    vel = t.velocity.copy()
    starts = {bn.index: bn.side for bn in t.bounces}
    jumps = []
    for i in range(len(x)):
        if i in starts:
            mu, mtu, mv, mtv = _mirror(starts[i], a, b)
            # new frame: T_old composed with the mirror
            tu, tv = tu + su * mtu, tv + sv * mtv
            su, sv = su * mu, sv * mv
        x[i] = complex(su * t.x[i].real + tu, sv * t.x[i].imag + tv)
        vel[i] = complex(su * t.velocity[i].real, sv * t.velocity[i].imag)
        if i in starts:
            v_in, v_out = vel[i - 1], vel[i]
            jumps.append(abs(math.remainder(np.angle(v_out) - np.angle(v_in), 2 * math.pi)))
    out = CurvedTrajectory(
        kind=t.kind, frame="plane", s=t.s, x=x, velocity=vel, index=t.index, L=t.L, sigma=t.sigma,
        lattice=t.lattice, rect=t.rect, gaps=list(t.gaps), tangent_jumps=jumps, status=t.status,
        diagnostics=dict(t.diagnostics),
    )
    W, H = t.lattice
    cell = _cell(complex(x[0]), a, b)
    for i in range(1, len(x)):
        c = _cell(complex(x[i]), a, b)
        if c != cell:
            out.wraps.append(WrapEvent(float(t.s[i]), cell, c))
            cell = c
    return out


def fold_trajectory(t: CurvedTrajectory) -> CurvedTrajectory:
    """Fold a plane trajectory back into R (positions and velocities)."""
    a, b = t.rect
    xs, vs = [], []
    for z, v in zip(t.x, t.velocity):
        u, w, su, sv = fold_to_rectangle(z.real, z.imag, a, b)
        xs.append(complex(u, w))
        vs.append(complex(su * v.real, sv * v.imag))
    return CurvedTrajectory(
        kind=t.kind, frame="rectangle", s=t.s, x=np.array(xs), velocity=np.array(vs), index=t.index,
        L=t.L, sigma=t.sigma, lattice=t.lattice, rect=t.rect, status=t.status,
    )


def _rect_side(w: complex, a: float, b: float) -> str:
    d = {"right": abs(w.real - a), "left": abs(w.real + a), "top": abs(w.imag - b), "bottom": abs(w.imag)}
    return min(d, key=d.get)


def transport_trajectory(chart, field, t: PolygonalTrajectory, samples: int = 64) -> CurvedTrajectory:
    """Image of a billiard trajectory under the polygon-to-rectangle map.

    Each straight leg is sampled at ``samples`` equispaced points (including
    both ends); bounce points are mapped onto the rectangle boundary. The
    tangent is ``dw/dl = h'(z) d``, stored as the velocity ``n^2 h'(z) d``.
    Samples that fall inside a vertex guard disk are skipped and listed in
    ``gaps``.
    """
    from .schwarz import invert_polygon_map  # local: keeps import order simple

    sc = chart.sc
    m = chart.modulus
    a, b = m.a, m.b
    guard = 1e-6 * sc.target.diameter
    verts = sc.target.vertices
    xs, vel, ns, Ls, gaps, bounces = [], [], [], [], [], []
    eta = None
    acc = 0.0
    legs = list(t.legs())
    for li, (origin, d, ell, bounce) in enumerate(legs):
        if ell <= 0.0:
            continue
        for j in range(samples):
            frac = j / (samples - 1)
            z = origin + frac * ell * d
            last = j == samples - 1
            # every leg ends on a wall; all but the first start on one
            on_wall = last or (li > 0 and j == 0)
            if np.min(np.abs(verts - z)) < guard:
                gaps.append(len(xs))
                continue
            try:
                eta = invert_polygon_map(sc, z, eta, boundary=on_wall)
            except Exception:
                gaps.append(len(xs))
                eta = None
                continue
            if on_wall:
                eta = complex(eta.real, 0.0)
            w = chart_F(eta, m)
            dwdz = chart.derivative_at_eta(eta)
            nloc = 1.0 / abs(dwdz)
            if li > 0 and j == 0:
                bounces.append(SideBounce(len(xs), _rect_side(w, a, b), w))
            xs.append(w)
            vel.append(nloc * nloc * dwdz * d)
            ns.append(nloc)
            Ls.append(acc + frac * ell)
        acc += ell
    x = np.array(xs)
    L = np.array(Ls)
    N = np.array(ns)
    out = CurvedTrajectory(
        kind="mapped", frame="rectangle", s=np.full(len(x), math.nan), x=x, velocity=np.array(vel),
        index=N, L=L, sigma=np.zeros(len(x)), lattice=(4 * a, 2 * b), rect=(a, b), bounces=bounces,
        gaps=gaps, status=t.status,
    )
    out.sigma = _sigma_from_L(field, out)
    return out


def transport_segment(field, z0, direction, length: float, samples: int = 64) -> CurvedTrajectory:
    """Image of a straight segment under an explicit map with ``forward`` and ``derivative``."""
    z0, d = as_point(z0), as_point(direction)
    d /= abs(d)
    ell = np.linspace(0.0, length, samples)
    xs, vel, ns = [], [], []
    for t in ell:
        z = z0 + t * d
        dwdz = field.derivative(z)
        nloc = 1.0 / abs(dwdz)
        xs.append(field.forward(z))
        vel.append(nloc * nloc * dwdz * d)
        ns.append(nloc)
    out = CurvedTrajectory(
        kind="mapped", frame="plane", s=np.full(samples, math.nan), x=np.array(xs), velocity=np.array(vel),
        index=np.array(ns), L=ell, sigma=np.zeros(samples), lattice=(math.inf, math.inf),
        rect=(field.a, field.b),
    )
    out.sigma = _sigma_from_L(field, out)
    return out


def chart_F(eta: complex, m) -> complex:
    from .elliptic import incomplete_F

    return incomplete_F(eta, m)


def _sigma_from_L(field, t: CurvedTrajectory) -> np.ndarray:
    # d sigma / dL = 1/n; three-point Gauss-Legendre on the Hermite interpolant
    xg, wg = gauss_legendre(3)
    sig = np.zeros(len(t.x))
    for i in range(1, len(t.x)):
        dL = t.L[i] - t.L[i - 1]
        if dL <= 0.0:
            sig[i] = sig[i - 1]
            continue
        p0, p1 = t.x[i - 1], t.x[i]
        m0, m1 = t.velocity[i - 1] / t.index[i - 1] ** 2 * dL, t.velocity[i] / t.index[i] ** 2 * dL
        acc = 0.0
        for xi, wi in zip(xg, wg):
            tau = 0.5 * (xi + 1.0)
            h00 = 2 * tau**3 - 3 * tau**2 + 1
            h10 = tau**3 - 2 * tau**2 + tau
            h01 = -2 * tau**3 + 3 * tau**2
            h11 = tau**3 - tau**2
            z = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1
            try:
                nz = field.index_and_log_gradient(z.real, z.imag)[0]
            except SingularEvaluation:
                nz = 0.5 * (t.index[i - 1] + t.index[i])
            acc += 0.5 * wi / nz
        sig[i] = sig[i - 1] + acc * dL
    return sig


class Comparison(NamedTuple):
    deviation: float
    frechet_bound: float
    length_ratio: float
    n_points: int


def _param(t: CurvedTrajectory, kind: str):
    if kind == "optical":
        p = t.L
        d = t.velocity / t.index**2
    elif kind == "euclidean":
        p = t.sigma
        d = t.velocity / np.abs(t.velocity)
    else:
        raise DomainError(f"unknown parametrisation {kind!r}")
    keep = np.concatenate(([True], np.diff(p) > 0.0))
    return p[keep], t.x[keep], d[keep]


def _spline(p, x, d) -> CubicHermiteSpline:
    return CubicHermiteSpline(p, np.column_stack([x.real, x.imag]), np.column_stack([d.real, d.imag]))


def compare_curves(c1: CurvedTrajectory, c2: CurvedTrajectory, metric: str = "optical") -> Comparison:
    """Max distance between the curves at matched fractions of their length.

    ``metric`` chooses the length: "optical" (L, the polygon arc length) or
    "euclidean" (sigma, arc length in the rectangle plane). ``deviation``
    is measured at the samples of ``c1``; ``frechet_bound`` also includes the
    samples of ``c2`` and bounds the Frechet distance from above.
    """
    if c1.frame != c2.frame:
        raise DomainError("curves are in different frames")
    p1, x1, d1 = _param(c1, metric)
    p2, x2, d2 = _param(c2, metric)
    T1, T2 = p1[-1] - p1[0], p2[-1] - p2[0]
    if T1 <= 0 or T2 <= 0:
        raise IncomparableCurves("degenerate curve")
    ratio = max(T1, T2) / min(T1, T2)
    if ratio > 2.0:
        raise IncomparableCurves(f"curve lengths differ by a factor {ratio:.3g}")
    f1 = (p1 - p1[0]) / T1
    f2 = (p2 - p2[0]) / T2
    s2 = _spline(f2, x2, d2 * T2)
    s1 = _spline(f1, x1, d1 * T1)
    q = s2(f1)
    dev12 = float(np.max(np.abs(x1 - (q[:, 0] + 1j * q[:, 1]))))
    q = s1(f2)
    dev21 = float(np.max(np.abs(x2 - (q[:, 0] + 1j * q[:, 1]))))
    return Comparison(dev12, max(dev12, dev21), ratio, len(f1))


class ClosedGeodesic(NamedTuple):
    parameter: float  # optical length of one period
    translation: tuple[int, int]  # lattice vector in units of (4a, 2b)
    position_error: float
    direction_error: float


def closed_geodesic_check(
    t: CurvedTrajectory, tol: float = 1e-8, anchor: int = 0, direction_tol: float = 1e-6
) -> ClosedGeodesic | None:
    """First return of the plane curve to ``x[anchor]`` modulo the lattice, with the same heading."""
    if t.frame != "plane":
        t = unfold_to_torus(t)
    W, H = t.lattice
    p, x, d = _param(t, "optical")
    L0 = t.L[anchor]
    i0 = int(np.searchsorted(p, L0))
    x0 = complex(t.x[anchor])
    h0 = np.angle(t.velocity[anchor])
    sp = _spline(p, x, d)

    def disp(z):
        i, j = round((z.real - x0.real) / W), round((z.imag - x0.imag) / H)
        return abs(z - x0 - complex(i * W, j * H)), (i, j)

    dist = np.array([disp(complex(z))[0] for z in x])
    step = np.max(np.abs(np.diff(x))) if len(x) > 1 else 0.0
    for j in range(i0 + 2, len(x)):
        lo = j - 1
        hi = min(j + 1, len(x) - 1)
        if not (dist[j] <= dist[lo] and dist[j] <= dist[hi] and dist[j] < 2 * step):
            continue
        _, trans = disp(complex(x[j]))
        target = x0 + complex(trans[0] * W, trans[1] * H)

        def phi(par):
            # derivative of |H - target|^2 / 2
            q, dq = sp(par), sp(par, 1)
            return (q[0] - target.real) * dq[0] + (q[1] - target.imag) * dq[1]

        lo_p, hi_p = p[lo], p[hi]
        if phi(lo_p) < 0.0 < phi(hi_p):
            par = brentq(phi, lo_p, hi_p, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        else:
            par = p[j]
        q = sp(par)
        perr = abs(complex(q[0], q[1]) - target)
        if perr <= tol:
            q = sp(par, 1)
            heading = np.angle(complex(q[0], q[1]))
            derr = abs(math.remainder(heading - h0, 2 * math.pi))
            if derr <= direction_tol:
                return ClosedGeodesic(float(par - L0), trans, float(perr), derr)
    return None
