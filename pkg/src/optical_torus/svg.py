"""Deterministic SVG figures: fixed canvas, fixed number formatting, no timestamps."""

from __future__ import annotations

import math

import numpy as np

from .field import fold_to_rectangle

WIDTH = 640
MARGIN = 24
_COLORS = ["#1f4e79", "#c0392b", "#2e7d32", "#7b1fa2"]
# piecewise-linear ramp for heat maps (dark blue -> teal -> yellow)
_RAMP = [(0.0, (68, 1, 84)), (0.25, (59, 82, 139)), (0.5, (33, 145, 140)), (0.75, (94, 201, 98)), (1.0, (253, 231, 37))]


def _f(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Canvas:
    def __init__(self, xmin, xmax, ymin, ymax, width=WIDTH):
        self.xmin, self.ymax = xmin, ymax
        span = max(xmax - xmin, 1e-300)
        self.scale = (width - 2 * MARGIN) / span
        self.width = width
        self.height = int(round((ymax - ymin) * self.scale)) + 2 * MARGIN
        self.items: list[str] = []

    def pt(self, z: complex) -> tuple[str, str]:
        return _f(MARGIN + (z.real - self.xmin) * self.scale), _f(MARGIN + (self.ymax - z.imag) * self.scale)

    def polyline(self, pts, color, width=1.5, closed=False, dash=None):
        coords = " ".join(",".join(self.pt(complex(z))) for z in pts)
        tag = "polygon" if closed else "polyline"
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<{tag} points="{coords}" fill="none" stroke="{color}" stroke-width="{_f(width)}"{extra}/>')

    def circle(self, z, r, fill, stroke="none"):
        x, y = self.pt(complex(z))
        self.items.append(f'<circle cx="{x}" cy="{y}" r="{_f(r)}" fill="{fill}" stroke="{stroke}"/>')

    def text(self, z, s, size=11, dx=4, dy=-4):
        x, y = self.pt(complex(z))
        self.items.append(
            f'<text x="{_f(float(x) + dx)}" y="{_f(float(y) + dy)}" font-family="sans-serif" font-size="{size}">{s}</text>'
        )

    def rect(self, z0, z1, fill):
        x0, y1 = self.pt(complex(min(z0.real, z1.real), max(z0.imag, z1.imag)))
        x1, y0 = self.pt(complex(max(z0.real, z1.real), min(z0.imag, z1.imag)))
        w, h = float(x1) - float(x0), float(y0) - float(y1)
        self.items.append(f'<rect x="{x0}" y="{y1}" width="{_f(w)}" height="{_f(h)}" fill="{fill}"/>')

    def render(self, title: str) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        )
        return "\n".join([head, f"<title>{title}</title>", '<rect width="100%" height="100%" fill="white"/>']
                         + self.items + ["</svg>"]) + "\n"


def _bounds(points, pad=0.04):
    z = np.asarray(points)
    x0, x1, y0, y1 = z.real.min(), z.real.max(), z.imag.min(), z.imag.max()
    p = pad * max(x1 - x0, y1 - y0)
    return x0 - p, x1 + p, y0 - p, y1 + p


def _ramp(t: float) -> str:
    t = min(1.0, max(0.0, t))
    for (t0, c0), (t1, c1) in zip(_RAMP, _RAMP[1:]):
        if t <= t1:
            s = (t - t0) / (t1 - t0)
            r, g, b = (round(c0[i] + s * (c1[i] - c0[i])) for i in range(3))
            return f"#{r:02x}{g:02x}{b:02x}"
    return "#fde725"


def polygon_orbit_svg(t) -> str:
    """Polygon with a straight billiard orbit."""
    verts = list(t.polygon.vertices)
    pts = [t.start] + [b.point for b in t.bounces]
    end = pts[-1] + t.tail * (t.bounces[-1].direction if t.bounces else t.start_direction)
    c = _Canvas(*_bounds(verts))
    c.polyline(verts, "#000000", 2.0, closed=True)
    c.polyline(pts + [end], _COLORS[0], 1.5)
    c.circle(t.start, 3.5, _COLORS[1])
    for i, p in enumerate(pts[1:], start=1):
        c.text(p, str(i), 10)
    return c.render("billiard orbit")


def rectangle_curves_svg(rect: tuple[float, float], curves, labels=None) -> str:
    """Curves inside the rectangle [-a, a] x [0, b]."""
    a, b = rect
    c = _Canvas(-a * 1.04, a * 1.04, -0.04 * b, b * 1.04)
    c.polyline([complex(-a, 0), complex(a, 0), complex(a, b), complex(-a, b)], "#000000", 2.0, closed=True)
    for i, cur in enumerate(curves):
        c.polyline(list(cur), _COLORS[i % len(_COLORS)], 1.5, dash="5,3" if i else None)
    for i, lab in enumerate(labels or []):
        c.text(complex(-a, b), lab, 11, dx=4, dy=14 + 14 * i)
    return c.render("curves in the rectangle")


def plane_curves_svg(curves, title="curves") -> str:
    allpts = np.concatenate([np.asarray(cur) for cur in curves])
    c = _Canvas(*_bounds(allpts))
    for i, cur in enumerate(curves):
        c.polyline(list(cur), _COLORS[i % len(_COLORS)], 1.5, dash="5,3" if i else None)
    return c.render(title)


def unfolded_svg(field, curves) -> str:
    """Unfolded curves over the tiling by copies of R; the fundamental domain is shaded."""
    a, b = field.a, field.b
    allpts = np.concatenate([np.asarray(cur) for cur in curves] + [np.array([complex(-a, 0), complex(3 * a, 2 * b)])])
    x0, x1, y0, y1 = _bounds(allpts)
    c = _Canvas(x0, x1, y0, y1)
    c.rect(complex(-a, 0), complex(3 * a, 2 * b), "#eef3f8")
    i0, i1 = math.floor((x0 + a) / (2 * a)), math.ceil((x1 + a) / (2 * a))
    j0, j1 = math.floor(y0 / b), math.ceil(y1 / b)
    for i in range(i0, i1 + 1):
        u = -a + 2 * a * i
        c.polyline([complex(u, y0), complex(u, y1)], "#9e9e9e", 0.6)
    for j in range(j0, j1 + 1):
        c.polyline([complex(x0, j * b), complex(x1, j * b)], "#9e9e9e", 0.6)
    for i, cur in enumerate(curves):
        c.polyline(list(cur), _COLORS[i % len(_COLORS)], 1.5, dash="5,3" if i else None)
    return c.render("unfolded trajectory")


def heatmap_svg(field, nu: int = 48, nv: int = 24) -> str:
    """ln n over R on a cell-centred grid."""
    a, b = field.a, field.b
    c = _Canvas(-a, a, 0.0, b)
    vals = np.full((nv, nu), np.nan)
    for j in range(nv):
        for i in range(nu):
            u = -a + 2 * a * (i + 0.5) / nu
            v = b * (j + 0.5) / nv
            uf, vf, _, _ = fold_to_rectangle(u, v, a, b)
            vals[j, i] = field.log_index(uf, vf)
    finite = vals[np.isfinite(vals)]
    lo, hi = np.percentile(finite, [2, 98]) if finite.size else (0.0, 1.0)
    hi = hi if hi > lo else lo + 1.0
    for j in range(nv):
        for i in range(nu):
            z0 = complex(-a + 2 * a * i / nu, b * j / nv)
            z1 = complex(-a + 2 * a * (i + 1) / nu, b * (j + 1) / nv)
            c.rect(z0, z1, _ramp((vals[j, i] - lo) / (hi - lo)) if np.isfinite(vals[j, i]) else "#ffffff")
    for p in field.punctures_in_rectangle():
        c.circle(p.location, 3.0, "#ffffff", "#000000")
    return c.render("ln n on the rectangle")


def torus_svg(field) -> str:
    """Fundamental domain F with its four copies of R and the 2n punctures."""
    a, b = field.a, field.b
    c = _Canvas(-a - 0.1 * a, 3 * a + 0.1 * a, -0.1 * b, 2 * b + 0.1 * b)
    c.polyline([complex(-a, 0), complex(3 * a, 0), complex(3 * a, 2 * b), complex(-a, 2 * b)], "#000000", 2.0, closed=True)
    c.polyline([complex(a, 0), complex(a, 2 * b)], "#555555", 1.0, dash="4,3")
    c.polyline([complex(-a, b), complex(3 * a, b)], "#555555", 1.0, dash="4,3")
    for name, z in (("R", complex(0, 0.5 * b)), ("Rr", complex(2 * a, 0.5 * b)), ("Ru", complex(0, 1.5 * b)),
                    ("Rru", complex(2 * a, 1.5 * b))):
        c.text(z, name, 12, dx=-8, dy=4)
    colors = {"corner": "#000000", "pole": _COLORS[1], "vertex": _COLORS[0]}
    for p in field.singular_catalog():
        c.circle(p.location, 4.0, colors[p.kind])
        c.text(p.location, p.label, 11)
    return c.render(f"torus with {len(field.catalog)} punctures")
