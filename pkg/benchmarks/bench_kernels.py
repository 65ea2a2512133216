"""Compiled vs pure-Python kernels.

Times each hot kernel directly under both backends, then one end-to-end
ray integration with the backend swapped in place. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--repeat N] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import math
import time

import numpy as np

from optical_torus import _kernels_py, kernels
from optical_torus import fixtures as fx
from optical_torus.field import build_field
from optical_torus.geodesic import integrate_geodesic
from optical_torus.schwarz import build_chart

try:
    from optical_torus import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

NAMES = ("sncndn", "sncndn_complex", "log_index_grad", "sc_factors")


def _best(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(mod, field):
    rng = np.random.default_rng(7)
    us = rng.uniform(-1.5, 1.5, 2000)
    vs = rng.uniform(0.0, 1.3, 2000)
    k, kp, b = field.modulus.k, field.modulus.k_prime, field.b
    c, e = field.centers, field.exponents
    sc = field.chart.sc
    zeta = rng.uniform(-3, 3, 4000) + 1j * rng.uniform(0.01, 3, 4000)
    # quadrature panels call with one 16-node batch at a time
    panels = zeta[:2000].reshape(-1, 16)
    return {
        "sncndn": (lambda: [mod.sncndn(u, k) for u in us], len(us)),
        "sncndn_complex": (lambda: [mod.sncndn_complex(u, v, k, kp) for u, v in zip(us, vs)], len(us)),
        "log_index_grad": (lambda: [mod.log_index_grad(u, v, k, kp, b, c, e) for u, v in zip(us, vs)], len(us)),
        "sc_factors": (lambda: mod.sc_factors(zeta, sc.prevertices, sc.exponents), len(zeta)),
        "sc_factors/16": (lambda: [mod.sc_factors(p, sc.prevertices, sc.exponents) for p in panels], len(panels)),
    }


def swap_backend(mod) -> None:
    for name in NAMES:
        setattr(kernels, name, getattr(mod, name))


def main(argv=None) -> dict:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write results here")
    args = ap.parse_args(argv)

    chart = build_chart(fx.polygon("hexagon"), fx.HEXAGON_K, fx.HEXAGON_PIVOT)
    field = build_field(chart)
    backends = {"python": _kernels_py}
    if _compiled is not None:
        backends["compiled"] = _compiled

    results: dict = {"kernels": {}, "pipeline": {}}
    for label, mod in backends.items():
        for name, (fn, count) in kernel_cases(mod, field).items():
            t = _best(fn, args.repeat)
            results["kernels"].setdefault(name, {})[label] = 1e6 * t / count

    original = {name: getattr(kernels, name) for name in NAMES}
    w0 = complex(0.1, 0.4 * field.b)
    try:
        for label, mod in backends.items():
            swap_backend(mod)
            t0 = time.perf_counter()
            ray = integrate_geodesic(field, w0, complex(1.0, 0.3), s_max=10.0)
            results["pipeline"][label] = {"seconds": time.perf_counter() - t0, "steps": len(ray.x),
                                          "end": [ray.x[-1].real, ray.x[-1].imag]}
    finally:
        for name, fn in original.items():
            setattr(kernels, name, fn)

    print("(sc_factors is per point on one large array; sc_factors/16 is per 16-node panel call)")
    print(f"{'kernel':16s} {'python us/call':>15s} {'compiled us/call':>17s} {'speedup':>8s}")
    for name, row in results["kernels"].items():
        py, cc = row["python"], row.get("compiled", math.nan)
        print(f"{name:16s} {py:15.3f} {cc:17.3f} {py / cc:8.1f}")
    for label, row in results["pipeline"].items():
        print(f"ray integration ({label}): {row['seconds']:.3f} s, {row['steps']} samples")
    if len(results["pipeline"]) == 2:
        a, b = (np.array(r["end"]) for r in results["pipeline"].values())
        print(f"backend endpoint disagreement: {np.max(np.abs(a - b)):.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
    return results


if __name__ == "__main__":
    main()
