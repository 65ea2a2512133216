import math

import numpy as np
import pytest

from optical_torus import fixtures as fx
from optical_torus import kernels
from optical_torus.config import RunConfig
from optical_torus.errors import DomainError, IncomparableCurves, SingularEvaluation
from optical_torus.field import analytic_example_field, fold_to_rectangle
from optical_torus.geodesic import (
    CurvedTrajectory,
    closed_geodesic_check,
    compare_curves,
    integrate_geodesic,
    reflect_in_rectangle,
    transport_segment,
    transport_trajectory,
    unfold_to_torus,
)
from optical_torus.polygon import trace_billiard
from optical_torus.verification import equivalence_case

from conftest import BACKENDS, KERNEL_NAMES, chart, field


def _launch(name, z0, d):
    """Rectangle-side initial data of the polygon ray from z0 along d."""
    c = chart(name)
    eta = c.eta_of(z0)
    return c.forward(z0), c.derivative_at_eta(eta) * d


def _line(x, a=1.0):
    L = np.linspace(0, 1, len(x))
    v = np.full(len(x), a * (x[-1] - x[0]) / abs(x[-1] - x[0]))
    return CurvedTrajectory(kind="test", frame="plane", s=L.copy(), x=np.asarray(x), velocity=v,
                            index=np.full(len(x), a), L=L * a * abs(x[-1] - x[0]), sigma=L,
                            lattice=(math.inf, math.inf), rect=(1.0, 1.0))


def test_constant_field_gives_straight_line():
    f = field("rectangle")
    x0, d = complex(0.1, 0.3), complex(1, math.sqrt(2) - 1)
    g = integrate_geodesic(f, x0, d, s_max=10)
    assert g.status == "ok"
    e = d / abs(d)
    assert np.max(np.abs(((g.x - x0) * e.conjugate()).imag)) < 1e-12
    # constant n: |x'| = n, so s and L are proportional
    n = f.index_at(x0)
    assert g.L[-1] == pytest.approx(n * n * 10, rel=1e-12)


def test_analytic_segment_matches_integration():
    af = analytic_example_field()
    m = transport_segment(af, complex(0.3, 0.5), complex(1, 0.6), 1.0, 64)
    g = integrate_geodesic(af, m.x[0], m.velocity[0], L_target=1.0)
    assert g.status == "ok"
    assert g.L[-1] == 1.0
    assert compare_curves(m, g).deviation < 1e-8
    assert compare_curves(m, g, "euclidean").deviation < 1e-8


def test_energy_and_speed_over_twenty_units():
    f = field("hexagon")
    g = integrate_geodesic(f, complex(0.1, 0.4 * f.b), complex(1, 0.3), s_max=20)
    assert g.status == "ok"
    assert g.s[-1] == pytest.approx(20.0)
    assert np.max(np.abs(g.energy)) < 1e-8
    assert np.max(np.abs(g.speed_ratio - 1)) < 1e-6


def test_energy_drift_shrinks_with_tolerance():
    f = field("triangle")
    x0, d = _launch("triangle", complex(1.5, 1.0), complex(1, 0.2))
    drift = []
    for tol in (1e-8, 1e-10):
        g = integrate_geodesic(f, x0, d, s_max=4, rtol=tol, atol=tol)
        drift.append(np.max(np.abs(g.energy)))
    assert drift[1] < drift[0]


def test_reversibility():
    f = field("triangle")
    x0, d = _launch("triangle", complex(1.5, 1.0), complex(1, 0.2))
    g = integrate_geodesic(f, x0, d, s_max=5)
    x1, v1 = g.end
    back = integrate_geodesic(f, x1, -v1, L_target=g.L[-1])
    assert abs(back.x[-1] - x0) < 1e-6


def test_reflection_matches_folded_unfolded_ray():
    f = field("triangle")
    x0, d = _launch("triangle", complex(1.5, 1.0), complex(1, 0.2))
    r = reflect_in_rectangle(f, x0, d, s_max=8)
    g = integrate_geodesic(f, x0, d, s_max=8)
    assert r.status == g.status == "ok"
    assert len(r.bounces) >= 2
    a, b = f.a, f.b
    for side in r.bounces:
        w = side.point
        assert min(abs(w.real - a), abs(w.real + a), abs(w.imag), abs(w.imag - b)) < 1e-13
    folded = [complex(*fold_to_rectangle(z.real, z.imag, a, b)[:2]) for z in g.at(r.L)]
    assert np.max(np.abs(np.array(folded) - r.x)) < 1e-8
    u = unfold_to_torus(r)
    assert max(u.tangent_jumps) < 1e-9


def test_transport_bounces_on_rectangle_sides():
    c, f = chart("triangle"), field("triangle")
    t = trace_billiard(c.sc.target, *fx.fagnano_launch(c.sc.target), 6)
    m = transport_trajectory(c, f, t, 16)
    assert len(m.bounces) == 6 and not m.gaps
    a, b = f.a, f.b
    for bn in m.bounces:
        w = bn.point
        if bn.side in ("left", "right"):
            assert abs(abs(w.real) - a) < 1e-9
            normal = 1.0
        else:
            assert min(abs(w.imag), abs(w.imag - b)) < 1e-9
            normal = 1j
        v_in, v_out = m.velocity[bn.index - 1], m.velocity[bn.index]
        # specular: tangential part kept, normal part reversed
        tang = normal * 1j
        assert abs((v_in * tang.conjugate()).real - (v_out * tang.conjugate()).real) < 1e-8 * abs(v_in)
        assert abs((v_in * normal.conjugate()).real + (v_out * normal.conjugate()).real) < 1e-8 * abs(v_in)


def test_rectangle_chart_transport_is_shift():
    c, f = chart("rectangle"), field("rectangle")
    p = c.sc.target
    t = trace_billiard(p, complex(0.7 * c.modulus.a, 0.4 * c.modulus.b), complex(1, 0.7), 5)
    m = transport_trajectory(c, f, t, 8)
    legs = list(t.legs())
    expect = [origin + j / 7 * ell * d for origin, d, ell, _ in legs if ell > 0 for j in range(8)]
    assert np.max(np.abs(m.x - (np.array(expect) - c.modulus.a))) < 1e-9
    assert np.allclose(m.index, m.index[0], rtol=1e-9)


def test_square_diamond_closes():
    c, f = chart("square"), field("square")
    t = trace_billiard(c.sc.target, fx.DIAMOND_START, fx.DIAMOND_DIRECTION, 5)
    hit = closed_geodesic_check(unfold_to_torus(transport_trajectory(c, f, t, 64)), tol=1e-8)
    assert hit is not None
    assert tuple(abs(v) for v in hit.translation) == (1, 1)
    # one period is four legs of the billiard
    assert hit.parameter == pytest.approx(sum(t.segment_lengths[1:5]), rel=1e-8)


def test_fagnano_transport_closes():
    c, f = chart("triangle"), field("triangle")
    t = trace_billiard(c.sc.target, *fx.fagnano_launch(c.sc.target), 7)
    hit = closed_geodesic_check(unfold_to_torus(transport_trajectory(c, f, t, 64)), tol=1e-8)
    assert hit is not None


def test_irrational_slope_never_closes():
    f = field("rectangle")
    g = integrate_geodesic(f, complex(0.1, 0.3), complex(1, math.sqrt(2) - 1), s_max=10)
    assert len(g.wraps) > 0
    assert closed_geodesic_check(g, tol=1e-8) is None


def test_compare_identical_and_shifted():
    x = np.linspace(0, 1, 50) * (1 + 0.5j)
    c = _line(x)
    assert compare_curves(c, c).deviation == 0.0
    shifted = _line(x + 1e-3j)
    cmp = compare_curves(c, shifted)
    assert cmp.deviation == pytest.approx(1e-3, rel=1e-9)
    assert cmp.frechet_bound >= cmp.deviation


def test_compare_refuses_mismatched_curves():
    x = np.linspace(0, 1, 20) + 0j
    with pytest.raises(IncomparableCurves):
        compare_curves(_line(x), _line(2.5 * x))
    other = _line(x)
    other.frame = "rectangle"
    with pytest.raises(DomainError):
        compare_curves(_line(x), other)


@pytest.mark.parametrize("vertex", [0, 1, 2])
def test_ray_into_corner_halts_at_guard(vertex):
    c, f = chart("triangle"), field("triangle")
    verts = c.sc.target.vertices
    z0 = verts.mean()
    x0, d = _launch("triangle", z0, verts[vertex] - z0)
    g = integrate_geodesic(f, x0, d, s_max=50)
    assert g.status == "singular_approach"
    assert g.diagnostics["puncture"] == ("R1", "R2", "R3")[vertex]
    gr = 1e-4 * min(f.a, f.b)
    assert gr * 0.9 < abs(g.x[-1] - c.vertex_images()[vertex]) < 1.1 * gr


def test_start_inside_guard_refused():
    f = field("triangle")
    with pytest.raises(SingularEvaluation):
        integrate_geodesic(f, complex(-f.a + 1e-6, 1e-6), 1, s_max=1)


def test_stop_condition_required():
    f = field("triangle")
    with pytest.raises(DomainError):
        integrate_geodesic(f, 0.5j, 1)
    with pytest.raises(DomainError):
        integrate_geodesic(f, 0.5j, 0, s_max=1)


def test_backends_agree(monkeypatch):
    f = field("hexagon")
    ends = []
    for mod in BACKENDS.values():
        for name in KERNEL_NAMES:
            monkeypatch.setattr(kernels, name, getattr(mod, name))
        g = integrate_geodesic(f, complex(0.1, 0.4 * f.b), complex(1, 0.3), s_max=5)
        assert g.status == "ok"
        ends.append(g.x[-1])
    assert max(abs(e - ends[0]) for e in ends) < 1e-9


def test_wraps_follow_cell_changes():
    f = field("hexagon")
    g = integrate_geodesic(f, complex(0.1, 0.4 * f.b), complex(1, 0.3), s_max=20)
    W, H = g.lattice
    a = f.a
    cells = [(math.floor((z.real + a) / W), math.floor(z.imag / H)) for z in g.x]
    changes = sum(1 for p, q in zip(cells, cells[1:]) if p != q)
    assert len(g.wraps) == changes > 0
    s = [w.s for w in g.wraps]
    assert s == sorted(s)


def test_exports_roundtrip():
    f = field("triangle")
    g = integrate_geodesic(f, complex(0.1, 0.5), 1 + 0.2j, s_max=1)
    d = g.to_dict()
    assert len(d["x"]) == len(g.x) and d["status"] == "ok"
    csv = g.to_csv().splitlines()
    assert csv[0].startswith("s,u,v") and len(csv) == len(g.x) + 1


@pytest.mark.parametrize("name,start,direction", [
    ("triangle", complex(1.5, 1.0), complex(1, 0.2)),
    ("square", complex(0.3, 0.6), complex(1, 0.37)),
    ("rectangle", None, complex(1, 0.61)),
    ("hexagon", fx.HEXAGON_START, fx.HEXAGON_DIRECTION),
])
def test_transport_equals_integration(name, start, direction):
    c = chart(name)
    if start is None:
        start = complex(0.3 * c.modulus.a, 0.45 * c.modulus.b)
    r = equivalence_case(c, start, direction, 6, 32, RunConfig().validate())
    assert r["billiard_status"] == r["ray_status"] == "ok"
    assert r["bounces"] >= 5 and r["gaps"] == 0
    assert r["deviation"] < 1e-6
    assert r["max_energy"] < 1e-8 and r["max_speed_error"] < 1e-6
    assert r["max_tangent_jump"] < 1e-6
