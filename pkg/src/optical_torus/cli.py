"""Command-line front end: ``optical-torus {map,trace,geodesic,verify,render,eval}``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input or
missing artifacts, 3 numerical failure (solver, inversion, integration).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import export, svg
from .config import DEFAULTS, TOLERANCE_KEYS, RunConfig, defaults_table
from .elliptic import EllipticModulus, complete_K, dF_deta, incomplete_F, jacobi_sn
from .errors import DomainError, OpticalTorusError, PolygonError
from .field import analytic_example_field, build_field
from .geodesic import (
    compare_curves,
    integrate_geodesic,
    transport_segment,
    transport_trajectory,
    unfold_to_torus,
)
from .polygon import trace_billiard
from .schwarz import DEFAULT_K, ConformalChart, admissible_k_max, build_chart
from .verification import run_suite

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def _pair(text: str) -> tuple[float, float]:
    try:
        x, y = (float(t) for t in text.replace(";", ",").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return x, y


def _tol(text: str) -> tuple[str, float]:
    name, _, value = text.partition("=")
    if name not in TOLERANCE_KEYS:
        raise argparse.ArgumentTypeError(f"unknown tolerance {name!r}; choose from {', '.join(TOLERANCE_KEYS)}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value {value!r}") from None


def _k(text: str):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be a number or 'auto', got {text!r}") from None


def _common(p: argparse.ArgumentParser, polygon=True, trajectory=False):
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--out", help="output directory")
    p.add_argument("--tol", action="append", type=_tol, default=[], metavar="NAME=VALUE",
                   help="override a tolerance (repeatable)")
    if polygon:
        p.add_argument("--polygon", help="vertex file (JSON or 'x y' lines) or inline 'x,y; x,y; ...'")
        p.add_argument("--chart", help="stored chart JSON (skips the parameter solve)")
        p.add_argument("--k", type=_k, help="elliptic modulus, or 'auto' for an admissible value")
        p.add_argument("--pivot", type=int, help="polygon vertex sent to R1")
    if trajectory:
        p.add_argument("--start", type=_pair, action="append", help="start point 'x,y' in the polygon")
        p.add_argument("--dir", type=_pair, action="append", dest="direction", help="direction 'dx,dy'")
        p.add_argument("--bounces", type=int, help="billiard reflections")
        p.add_argument("--samples", type=int, help="mapped samples per leg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optical-torus",
        description="Polygon billiards as light rays in a flat index field on a punctured torus.",
        epilog="Defaults:\n" + "\n".join(f"  {k:15s} {v!r:24} {d}" for k, (v, d) in DEFAULTS.items()),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="solve the chart and write chart, field grid and catalog")
    _common(p)
    p.add_argument("--grid", type=int, help="rows of the field grid")

    p = sub.add_parser("trace", help="billiard orbit and its image in the rectangle")
    _common(p, trajectory=True)

    p = sub.add_parser("geodesic", help="integrate the ray equation and compare with the mapped orbit")
    _common(p, trajectory=True)
    p.add_argument("--s-max", type=float, dest="s_max", help="integrate freely up to this stepping parameter")
    p.add_argument("--field", choices=["chart", "analytic"], default="chart",
                   help="'analytic' uses n = 1/|w| from w = i exp(-z)")
    p.add_argument("--jobs", type=int, help="worker processes for several --start values")

    p = sub.add_parser("verify", help="run the verification suite and write a JSON report")
    _common(p, polygon=False)
    p.add_argument("--chart", help="also verify this stored chart")
    p.add_argument("--check", action="append", help="run only the named checks")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--seed", type=int, help="seed for randomised probes")

    p = sub.add_parser("render", help="SVG figures from map/trace artifacts")
    p.add_argument("--input", required=True, help="directory written by map or trace")
    p.add_argument("--out", help="figure directory (default: the input directory)")

    p = sub.add_parser("eval", help="evaluate K, F, dF/deta or sn at a point")
    p.add_argument("function", choices=["K", "F", "dF", "sn"])
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--arg", type=complex, default=0j, help="argument, e.g. 0.3+0.4j")

    sub.add_parser("defaults", help="print the defaults table")
    return parser


def _config(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else RunConfig()
    over = {}
    for key in ("polygon", "chart", "k", "pivot", "bounces", "samples", "s_max", "grid", "jobs", "out", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            over[key] = val
    if getattr(args, "start", None):
        over["start"] = args.start[0]
    if getattr(args, "direction", None):
        over["direction"] = args.direction[0]
    cfg.update(over)
    if getattr(args, "tol", None):
        cfg.tolerances = {**cfg.tolerances, **dict(args.tol)}
    return cfg.validate()


def _resolve_k(cfg: RunConfig, poly) -> float:
    if cfg.k != "auto":
        return float(cfg.k)
    kmax = admissible_k_max(poly, cfg.pivot)
    return min(DEFAULT_K, 0.75 * kmax)


def _chart(cfg: RunConfig) -> ConformalChart:
    if cfg.chart:
        try:
            return ConformalChart.from_dict(json.loads(Path(cfg.chart).read_text()))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read chart {cfg.chart}: {exc}") from None
    if not cfg.polygon:
        raise InputError("give --polygon or --chart")
    poly = export.load_polygon(cfg.polygon)
    return build_chart(poly, _resolve_k(cfg, poly), cfg.pivot)


def _emit(obj) -> None:
    sys.stdout.write(export.dumps(obj))


def cmd_map(cfg: RunConfig) -> int:
    chart = _chart(cfg)
    f = build_field(chart)
    out = Path(cfg.out)
    export.write_json(out / "chart.json", chart.to_dict())
    meta = {**f.metadata(), "vertex_residual": chart.sc.vertex_residual(), "pivot": chart.pivot}
    export.write_json(out / "field.json", meta)
    export.write_text(out / "field_grid.csv", export.field_grid_csv(f, 2 * cfg.grid - 1, cfg.grid))
    export.write_text(out / "heatmap.svg", svg.heatmap_svg(f))
    export.write_text(out / "torus.svg", svg.torus_svg(f))
    _emit({
        "k": chart.modulus.k,
        "pivot": chart.pivot,
        "prevertices": chart.sc.prevertices,
        "accessory_prevertices": max(0, chart.sc.n - 3),
        "vertex_residual": chart.sc.vertex_residual(),
        "singular_points": len(f.catalog),
        "outputs": ["chart.json", "field.json", "field_grid.csv", "heatmap.svg", "torus.svg"],
    })
    return EXIT_OK


def _launch(cfg: RunConfig):
    if cfg.start is None or cfg.direction is None:
        raise InputError("give --start and --dir")
    return complex(*cfg.start), complex(*cfg.direction)


def cmd_trace(cfg: RunConfig) -> int:
    chart = _chart(cfg)
    f = build_field(chart)
    z0, d0 = _launch(cfg)
    t = trace_billiard(chart.sc.target, z0, d0, cfg.bounces)
    if t.status == "vertex_hit":
        print(f"warning: orbit hits a vertex after {len(t.bounces)} bounces; output truncated", file=sys.stderr)
    mapped = transport_trajectory(chart, f, t, cfg.samples)
    unfolded = unfold_to_torus(mapped)
    out = Path(cfg.out)
    export.write_json(out / "chart.json", chart.to_dict())
    export.write_json(out / "billiard.json", export.billiard_to_dict(t))
    export.write_text(out / "billiard.csv", export.billiard_to_csv(t))
    export.write_json(out / "mapped.json", mapped.to_dict())
    export.write_text(out / "mapped.csv", mapped.to_csv())
    export.write_json(out / "unfolded.json", unfolded.to_dict())
    _render_trace(out, f, t, mapped, unfolded)
    _emit({
        "status": t.status,
        "bounces": len(t.bounces),
        "length": t.total_length + t.tail,
        "gaps": len(mapped.gaps),
        "max_tangent_jump": max(unfolded.tangent_jumps, default=0.0),
        "wraps": len(unfolded.wraps),
    })
    return EXIT_OK


def _render_trace(out: Path, f, t, mapped, unfolded) -> None:
    export.write_text(out / "polygon_orbit.svg", svg.polygon_orbit_svg(t))
    export.write_text(out / "rectangle_orbit.svg", svg.rectangle_curves_svg((f.a, f.b), [mapped.x]))
    export.write_text(out / "unfolded.svg", svg.unfolded_svg(f, [unfolded.x]))


def _geodesic_job(args):
    return _geodesic_one(*args)


def _geodesic_one(cfg: RunConfig, z0: complex, d0: complex) -> dict:
    kw = dict(rtol=cfg.tol("rtol"), atol=cfg.tol("atol"), guard=cfg.tol("dynamics_guard"))
    if cfg.polygon == "analytic":
        af = analytic_example_field()
        length = cfg.s_max if cfg.s_max is not None else 1.0
        mapped = transport_segment(af, z0, d0, length, cfg.samples)
        ray = integrate_geodesic(af, mapped.x[0], mapped.velocity[0], L_target=length, **kw)
        return {"mapped": mapped, "ray": ray, "field": af}
    chart = _chart(cfg)
    f = build_field(chart)
    if cfg.s_max is not None:
        w0 = chart.forward(z0)
        eta = chart.eta_of(z0)
        dw = chart.derivative_at_eta(eta) * d0
        ray = integrate_geodesic(f, w0, dw, s_max=cfg.s_max, **kw)
        return {"mapped": None, "ray": ray, "field": f}
    t = trace_billiard(chart.sc.target, z0, d0, cfg.bounces)
    mapped = unfold_to_torus(transport_trajectory(chart, f, t, cfg.samples))
    ray = integrate_geodesic(f, mapped.x[0], mapped.velocity[0], L_target=mapped.L[-1], **kw)
    return {"mapped": mapped, "ray": ray, "field": f}


def cmd_geodesic(cfg: RunConfig, starts, dirs, use_analytic: bool) -> int:
    if use_analytic:
        cfg.polygon = "analytic"
        starts = starts or [(0.3, 0.5)]
        dirs = dirs or [(1.0, 0.6)]
    if not starts or not dirs:
        raise InputError("give --start and --dir")
    if len(dirs) == 1:
        dirs = dirs * len(starts)
    if len(dirs) != len(starts):
        raise InputError("give one --dir, or one per --start")
    jobs = [(cfg, complex(*s), complex(*d)) for s, d in zip(starts, dirs)]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_geodesic_job, jobs))
    else:
        results = [_geodesic_job(j) for j in jobs]
    out = Path(cfg.out)
    summary = []
    ok = True
    for i, r in enumerate(results):
        ray, mapped = r["ray"], r["mapped"]
        tag = f"_{i}" if len(results) > 1 else ""
        export.write_json(out / f"integrated{tag}.json", ray.to_dict())
        export.write_text(out / f"integrated{tag}.csv", ray.to_csv())
        item = {
            "status": ray.status,
            "samples": len(ray.x),
            "max_energy": float(np.max(np.abs(ray.energy))),
            "max_speed_error": float(np.max(np.abs(ray.speed_ratio - 1.0))),
            "wraps": len(ray.wraps),
            "optical_length": float(ray.L[-1]),
        }
        curves = [ray.x]
        if mapped is not None:
            cmp = compare_curves(mapped, ray)
            item["deviation"] = cmp.deviation
            item["frechet_bound"] = cmp.frechet_bound
            export.write_json(out / f"mapped{tag}.json", mapped.to_dict())
            curves = [mapped.x, ray.x]
            ok &= cmp.deviation < cfg.tol("tol_curve")
        ok &= ray.status == "ok" and item["max_energy"] < cfg.tol("tol_energy")
        fig = svg.plane_curves_svg(curves, "mapped and integrated rays") if use_analytic \
            else svg.unfolded_svg(r["field"], curves)
        export.write_text(out / f"overlay{tag}.svg", fig)
        summary.append(item)
    _emit({"passed": ok, "trajectories": summary})
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_verify(cfg: RunConfig, names=None, write_dir: str | None = None) -> int:
    chart_data = None
    if cfg.chart:
        try:
            chart_data = json.loads(Path(cfg.chart).read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"cannot read chart {cfg.chart}: {exc}") from None
    if names:
        from .verification import SUITE

        unknown = [n for n in names if n not in SUITE]
        if unknown:
            raise InputError(f"unknown checks {unknown}; choose from {sorted(SUITE)}")
    report = run_suite(cfg, names, chart_data)
    text = export.dumps(report)
    if write_dir:
        export.write_text(Path(write_dir) / "report.json", text)
    sys.stdout.write(text)
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']!r} (threshold {c['threshold']!r})",
              file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_CHECK


def cmd_render(input_dir: str, out_dir: str | None) -> int:
    src = Path(input_dir)
    out = Path(out_dir) if out_dir else src
    chart_path = src / "chart.json"
    if not chart_path.exists():
        raise InputError(f"missing artifact {chart_path}")
    chart = ConformalChart.from_dict(json.loads(chart_path.read_text()))
    f = build_field(chart)
    written = ["heatmap.svg", "torus.svg"]
    export.write_text(out / "heatmap.svg", svg.heatmap_svg(f))
    export.write_text(out / "torus.svg", svg.torus_svg(f))
    if (src / "billiard.json").exists():
        from .polygon import Bounce, PolygonalTrajectory

        data = json.loads((src / "billiard.json").read_text())
        t = PolygonalTrajectory(
            chart.sc.target, complex(*data["start"]), complex(*data["direction"]),
            [Bounce(complex(*b["point"]), complex(*b["direction"]), b["edge"]) for b in data["bounces"]],
            data["status"], data["tail"],
        )
        export.write_text(out / "polygon_orbit.svg", svg.polygon_orbit_svg(t))
        written.append("polygon_orbit.svg")
    if (src / "mapped.json").exists():
        m = json.loads((src / "mapped.json").read_text())
        xs = np.array([complex(*p) for p in m["x"]])
        export.write_text(out / "rectangle_orbit.svg", svg.rectangle_curves_svg((f.a, f.b), [xs]))
        written.append("rectangle_orbit.svg")
    if (src / "unfolded.json").exists():
        u = json.loads((src / "unfolded.json").read_text())
        xs = np.array([complex(*p) for p in u["x"]])
        export.write_text(out / "unfolded.svg", svg.unfolded_svg(f, [xs]))
        written.append("unfolded.svg")
    _emit({"written": written})
    return EXIT_OK


def cmd_eval(function: str, k: float, arg: complex) -> int:
    m = EllipticModulus.from_k(k)
    if function == "K":
        value = complete_K(k)
        _emit({"K": value, "K_prime": complete_K(m.k_prime)})
        return EXIT_OK
    if function == "F":
        value = incomplete_F(arg, m)
    elif function == "dF":
        value = dF_deta(arg, m)
    else:
        sn = jacobi_sn(arg, m)
        value = sn.value
        if not math.isfinite(abs(value)):
            _emit({"sn": None, "pole": True})
            return EXIT_OK
        _emit({"sn": [value.real, value.imag], "near_pole": sn.near_pole})
        return EXIT_OK
    _emit({function: [value.real, value.imag]})
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "defaults":
            print(defaults_table())
            return EXIT_OK
        if args.command == "eval":
            return cmd_eval(args.function, args.k, args.arg)
        if args.command == "render":
            return cmd_render(args.input, args.out)
        cfg = _config(args)
        if args.command == "map":
            return cmd_map(cfg)
        if args.command == "trace":
            return cmd_trace(cfg)
        if args.command == "geodesic":
            return cmd_geodesic(cfg, args.start, args.direction, args.field == "analytic")
        if args.command == "verify":
            return cmd_verify(cfg, args.check, args.out)
    except (InputError, PolygonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OpticalTorusError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
