"""Checks aggregated by ``optical-torus verify``.

Each check is a pure function of the configuration returning a
:class:`Check`; the report contains no timings or paths, so repeated runs
are byte-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fixtures as fx
from .config import DEFAULTS, RunConfig
from .elliptic import EllipticModulus, incomplete_F, jacobi_sn
from .errors import OpticalTorusError
from .field import analytic_example_field, build_field, harmonicity_residual
from .geodesic import (
    closed_geodesic_check,
    compare_curves,
    integrate_geodesic,
    transport_trajectory,
    unfold_to_torus,
)
from .polygon import detect_period, trace_billiard, unfold_billiard
from .schwarz import ConformalChart, build_chart, rectangle_polygon


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: dict = field(default_factory=dict)


def _order(residuals) -> list[float]:
    return [math.log2(r0 / r1) for r0, r1 in zip(residuals, residuals[1:])]


def worked_example(cfg: RunConfig) -> Check:
    f = analytic_example_field()
    rng = np.random.default_rng(cfg.seed)
    zs = f.corner + f.side * (rng.uniform(size=1000) + 1j * rng.uniform(size=1000))
    worst = 0.0
    for z in zs:
        w = f.forward(z)
        dzdw = 1.0 / abs(f.derivative(f.inverse(w)))
        worst = max(worst, abs(dzdw - 1.0 / abs(w)) * abs(w))
    spot = max(abs(f.index_at(1j) - 1.0), abs(f.index_at(complex(0.3, 0.4)) - 2.0))
    return Check("worked_example", worst < 1e-12 and spot < 1e-14, worst, 1e-12, {"point_values": spot})


def elliptic_corners(cfg: RunConfig) -> Check:
    worst = 0.0
    trip = 0.0
    for k in (0.3, 1.0 / math.sqrt(2.0), 0.9):
        m = EllipticModulus.from_k(k)
        for eta, w in ((1.0, m.a), (-1.0, -m.a), (1.0 / k, complex(m.a, m.b)), (-1.0 / k, complex(-m.a, m.b))):
            worst = max(worst, abs(incomplete_F(eta, m) - w))
        for x in np.linspace(-1.9 / k, 1.9 / k, 20):
            for y in np.linspace(0.05, 1.9 / k, 10):
                eta = complex(x, y)
                trip = max(trip, abs(jacobi_sn(incomplete_F(eta, m), m).value - eta) / max(1.0, abs(eta)))
    ok = worst < 1e-11 and trip < 1e-10
    return Check("elliptic_corners", ok, worst, 1e-11, {"roundtrip": trip, "roundtrip_threshold": 1e-10})


def _charts():
    return {
        "triangle": build_chart(fx.polygon("triangle"), 1.0 / math.sqrt(2.0)),
        "square": build_chart(fx.polygon("square"), fx.SQUARE_K),
        "rectangle": build_chart(rectangle_polygon(fx.RECTANGLE_K), fx.RECTANGLE_K),
        "hexagon": build_chart(fx.polygon("hexagon"), fx.HEXAGON_K, fx.HEXAGON_PIVOT),
    }


def sc_solve(cfg: RunConfig) -> Check:
    res = {name: ch.sc.vertex_residual() for name, ch in _charts().items()}
    worst = max(res.values())
    return Check("sc_vertex_reproduction", worst < cfg.tol("tol_vertex"), worst, cfg.tol("tol_vertex"), res)


def index_spread(field, nu: int = 20, nv: int = 20) -> float:
    vals = []
    for j in range(nv):
        for i in range(nu):
            w = complex(-field.a + 2 * field.a * (i + 0.5) / nu, field.b * (j + 0.5) / nv)
            vals.append(field.index_at(w))
    vals = np.array(vals)
    return float((vals.max() - vals.min()) / vals.mean())


def rectangle_spread(cfg: RunConfig) -> Check:
    f = build_field(build_chart(rectangle_polygon(fx.RECTANGLE_K), fx.RECTANGLE_K))
    s = index_spread(f)
    return Check("rectangle_index_spread", s < cfg.tol("tol_spread"), s, cfg.tol("tol_spread"))


def harmonicity(cfg: RunConfig) -> Check:
    af = analytic_example_field()
    wc = af.forward(af.corner + 0.5 * af.side * (1 + 1j))
    ra = [harmonicity_residual(af, h, wc, 0.1) for h in (0.02, 0.01, 0.005)]
    hf = build_field(build_chart(fx.polygon("hexagon"), fx.HEXAGON_K, fx.HEXAGON_PIVOT))
    rh = [harmonicity_residual(hf, h, complex(0.0, 0.5 * hf.b), 0.3 * hf.b) for h in (0.02, 0.01, 0.005)]
    orders = _order(ra) + _order(rh)
    low = min(orders)
    return Check("harmonicity_order", low >= cfg.tol("tol_order"), low, cfg.tol("tol_order"),
                 {"analytic_residuals": ra, "hexagon_residuals": rh, "orders": orders})


def equivalence_case(chart: ConformalChart, start, direction, bounces: int, samples: int, cfg: RunConfig) -> dict:
    """Transport a billiard orbit and integrate the geodesic from the same data."""
    field_ = build_field(chart)
    t = trace_billiard(chart.sc.target, start, direction, bounces)
    mapped = transport_trajectory(chart, field_, t, samples)
    unfolded = unfold_to_torus(mapped)
    ray = integrate_geodesic(field_, mapped.x[0], mapped.velocity[0], L_target=mapped.L[-1],
                             rtol=cfg.tol("rtol"), atol=cfg.tol("atol"), guard=cfg.tol("dynamics_guard"))
    cmp = compare_curves(unfolded, ray)
    return {
        "bounces": len(t.bounces),
        "billiard_status": t.status,
        "ray_status": ray.status,
        "deviation": cmp.deviation,
        "max_energy": float(np.max(np.abs(ray.energy))),
        "max_speed_error": float(np.max(np.abs(ray.speed_ratio - 1.0))),
        "max_tangent_jump": max(unfolded.tangent_jumps, default=0.0),
        "gaps": len(mapped.gaps),
        "samples": len(ray.x),
    }


def equivalence(cfg: RunConfig) -> Check:
    tri = build_chart(fx.polygon("triangle"), 1.0 / math.sqrt(2.0))
    hexa = build_chart(fx.polygon("hexagon"), fx.HEXAGON_K, fx.HEXAGON_PIVOT)
    cases = {
        "triangle": equivalence_case(tri, *fx.fagnano_launch(tri.sc.target), 7, cfg.samples, cfg),
        "hexagon": equivalence_case(hexa, fx.HEXAGON_START, fx.HEXAGON_DIRECTION, cfg.bounces, cfg.samples, cfg),
    }
    dev = max(c["deviation"] for c in cases.values())
    en = max(c["max_energy"] for c in cases.values())
    ok = all(
        c["deviation"] < cfg.tol("tol_curve") and c["max_energy"] < cfg.tol("tol_energy")
        and c["max_speed_error"] < cfg.tol("tol_speed") and c["bounces"] >= 5 and c["ray_status"] == "ok"
        and c["gaps"] == 0
        for c in cases.values()
    )
    return Check("transport_equals_geodesic", ok, dev, cfg.tol("tol_curve"), {"max_energy": en, **cases})


def catalog_counts() -> dict[int, int]:
    charts = {
        3: build_chart(fx.polygon("triangle"), 1.0 / math.sqrt(2.0)),
        4: build_chart(fx.polygon("square"), fx.SQUARE_K),
        5: build_chart(fx.polygon("pentagon"), fx.PENTAGON_K, fx.PENTAGON_PIVOT),
        6: build_chart(fx.polygon("hexagon"), fx.HEXAGON_K, fx.HEXAGON_PIVOT),
    }
    return {n: len(build_field(ch).singular_catalog()) for n, ch in charts.items()}


def square_closure(samples: int = 64):
    chart = build_chart(fx.polygon("square"), fx.SQUARE_K)
    f = build_field(chart)
    t = trace_billiard(chart.sc.target, fx.DIAMOND_START, fx.DIAMOND_DIRECTION, 5)
    mapped = transport_trajectory(chart, f, t, samples)
    return detect_period(t), closed_geodesic_check(unfold_to_torus(mapped), tol=1e-8)


def unfolding(cfg: RunConfig) -> Check:
    counts = catalog_counts()
    period, closed = square_closure(cfg.samples)
    hexa = build_chart(fx.polygon("hexagon"), fx.HEXAGON_K, fx.HEXAGON_PIVOT)
    f = build_field(hexa)
    t = trace_billiard(hexa.sc.target, fx.HEXAGON_START, fx.HEXAGON_DIRECTION, cfg.bounces)
    jumps = unfold_to_torus(transport_trajectory(hexa, f, t, 16)).tangent_jumps
    jmax = max(jumps)
    ok = (all(c == 2 * n for n, c in counts.items()) and closed is not None and period == 4
          and jmax < cfg.tol("tol_tangent"))
    detail = {
        "catalog_counts": {str(n): c for n, c in counts.items()},
        "square_period": period,
        "square_closed": closed is not None,
        "square_translation": list(closed.translation) if closed else None,
        "square_closure_error": closed.position_error if closed else None,
    }
    return Check("unfolding_and_torus", ok, jmax, cfg.tol("tol_tangent"), detail)


def billiard(cfg: RunConfig) -> Check:
    p = fx.polygon("triangle")
    z0, d0 = fx.fagnano_launch(p)
    t = trace_billiard(p, z0, d0, 7)
    period = detect_period(t, cfg.tol("tol_billiard"))
    closure = abs(t.bounces[3].point - t.bounces[0].point)
    pts = unfold_billiard(trace_billiard(fx.polygon("hexagon"), fx.HEXAGON_START, fx.HEXAGON_DIRECTION, 12))
    d = (pts[-1] - pts[0]) / abs(pts[-1] - pts[0])
    col = float(np.max(np.abs(((pts - pts[0]) * np.conj(d)).imag)))
    ok = period == 3 and closure < cfg.tol("tol_billiard") and col < cfg.tol("tol_billiard")
    return Check("billiard", ok, max(closure, col), cfg.tol("tol_billiard"),
                 {"fagnano_period": period, "fagnano_closure": closure, "unfold_collinearity": col})


def chart_file(cfg: RunConfig, data: dict) -> list[Check]:
    """Checks on a stored chart: vertex reproduction and the field oracle."""
    try:
        chart = ConformalChart.from_dict(data)
    except (OpticalTorusError, KeyError, TypeError, ValueError) as exc:
        return [Check("chart_load", False, math.inf, 0.0, {"error": str(exc)})]
    res = chart.sc.vertex_residual()
    out = [Check("chart_vertex_reproduction", res < cfg.tol("tol_vertex"), res, cfg.tol("tol_vertex"))]
    f = build_field(chart)
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(100):
        w = complex(rng.uniform(-0.9, 0.9) * f.a, rng.uniform(0.05, 0.95) * f.b)
        h = 1e-5 * min(f.a, f.b)
        fd = abs(chart.inverse(w + h) - chart.inverse(w - h)) / (2 * h)
        n = f.index_at(w)
        worst = max(worst, abs(fd - n) / n)
    out.append(Check("chart_index_vs_finite_difference", worst < 1e-6, worst, 1e-6))
    return out


SUITE = {
    "worked_example": worked_example,
    "elliptic_corners": elliptic_corners,
    "sc_vertex_reproduction": sc_solve,
    "rectangle_index_spread": rectangle_spread,
    "harmonicity_order": harmonicity,
    "transport_equals_geodesic": equivalence,
    "unfolding_and_torus": unfolding,
    "billiard": billiard,
}


def _run_one(args) -> Check:
    name, cfg = args
    try:
        return SUITE[name](cfg)
    except OpticalTorusError as exc:
        return Check(name, False, math.inf, 0.0, {"error": f"{type(exc).__name__}: {exc}"})


def run_suite(cfg: RunConfig, names=None, chart_data: dict | None = None) -> dict:
    names = list(names or SUITE)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            checks = list(pool.map(_run_one, [(n, cfg) for n in names]))
    else:
        checks = [_run_one((n, cfg)) for n in names]
    if chart_data is not None:
        checks += chart_file(cfg, chart_data)
    return {
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
        "defaults": {k: v[0] for k, v in DEFAULTS.items()},
        "tolerances": dict(sorted(cfg.tolerances.items())),
        "seed": cfg.seed,
    }

