"""Reading polygons and writing JSON / CSV artifacts byte-for-byte reproducibly."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import PolygonError
from .polygon import Polygon, PolygonalTrajectory, make_polygon


def _clean(obj):
    # plain JSON types; non-finite floats become null
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def parse_vertices(text: str) -> list[tuple[float, float]]:
    """Vertices from JSON (a list of pairs, or ``{"vertices": [...]}``) or plain text.

    Plain text has one ``x y`` or ``x, y`` pair per line; ``#`` starts a comment.
    """
    text = text.strip()
    if text.startswith("[") or text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PolygonError(f"bad polygon JSON: {exc}") from None
        if isinstance(data, dict):
            data = data.get("vertices", data.get("polygon"))
        try:
            return [(float(x), float(y)) for x, y in data]
        except (TypeError, ValueError):
            raise PolygonError("polygon JSON must be a list of [x, y] pairs") from None
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise PolygonError(f"cannot read vertex from line {line!r}")
        try:
            out.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise PolygonError(f"cannot read vertex from line {line!r}") from None
    return out


def load_polygon(source: str) -> Polygon:
    """Polygon from a file path or an inline vertex list such as ``"0,0; 4,0; 1,3"``."""
    p = Path(source)
    if p.exists():
        return make_polygon(parse_vertices(p.read_text()))
    if ";" in source:
        return make_polygon(parse_vertices("\n".join(source.split(";"))))
    if source.lstrip().startswith(("[", "{")):
        return make_polygon(parse_vertices(source))
    raise PolygonError(f"polygon file {source!r} not found")


def billiard_to_dict(t: PolygonalTrajectory) -> dict:
    return {
        "polygon": t.polygon.to_dict()["vertices"],
        "start": [t.start.real, t.start.imag],
        "direction": [t.start_direction.real, t.start_direction.imag],
        "status": t.status,
        "bounces": [
            {"point": [b.point.real, b.point.imag], "direction": [b.direction.real, b.direction.imag], "edge": b.edge}
            for b in t.bounces
        ],
        "tail": t.tail,
        "length": t.total_length + t.tail,
    }


def billiard_to_csv(t: PolygonalTrajectory, samples: int = 16) -> str:
    """Points sampled along every leg: ``leg,l,x,y``."""
    rows = ["leg,l,x,y"]
    acc = 0.0
    for i, (origin, d, ell, _) in enumerate(t.legs()):
        for j in range(samples + 1):
            s = ell * j / samples
            z = origin + s * d
            rows.append(f"{i},{acc + s!r},{z.real!r},{z.imag!r}")
        acc += ell
    return "\n".join(rows) + "\n"


def field_grid(field, nu: int = 41, nv: int = 21) -> list[tuple[float, float, float, float]]:
    """``(u, v, n, U)`` on a cell-centred grid of R (cell centres avoid the punctures)."""
    a, b = field.a, field.b
    rows = []
    for j in range(nv):
        v = b * (j + 0.5) / nv
        for i in range(nu):
            u = -a + 2 * a * (i + 0.5) / nu
            try:
                n = field.index_at(complex(u, v))
            except Exception:
                n = math.nan
            rows.append((u, v, n, -0.5 * n * n))
    return rows


def field_grid_csv(field, nu: int = 41, nv: int = 21) -> str:
    lines = ["u,v,n,U"] + [f"{u!r},{v!r},{n!r},{U!r}" for u, v, n, U in field_grid(field, nu, nv)]
    return "\n".join(lines) + "\n"
