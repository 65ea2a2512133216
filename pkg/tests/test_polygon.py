import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from optical_torus import fixtures as fx
from optical_torus.errors import DegenerateVertexError, DomainError, PolygonError, SelfIntersectionError
from optical_torus.field import analytic_example_field
from optical_torus.polygon import detect_period, is_rational, make_polygon, trace_billiard, unfold_billiard


def test_square_angles():
    p = make_polygon(fx.UNIT_SQUARE)
    assert np.allclose(p.alphas, 0.5, atol=1e-15)
    assert p.alphas.sum() == pytest.approx(2.0, abs=1e-14)


def test_equilateral_angles():
    p = make_polygon(fx.EQUILATERAL)
    assert np.allclose(p.alphas, 1 / 3, atol=1e-14)
    assert p.alphas.sum() == pytest.approx(1.0, abs=1e-14)


def test_clockwise_input_is_reoriented():
    p = make_polygon(list(reversed(fx.UNIT_SQUARE)))
    z = p.vertices
    area = 0.5 * np.sum((np.conj(z) * np.roll(z, -1)).imag)
    assert area > 0
    assert np.allclose(p.alphas, 0.5)


def test_worked_example_square_is_valid_and_avoids_origin():
    f = analytic_example_field()
    assert f.square.n == 4
    zs = f.square.vertices
    # image of the closed square: |w| = exp(-x) <= exp(-0.2) < 1, never 0
    for z in zs:
        r = abs(f.forward(z))
        assert 0 < r <= 1
    assert all(f.index_at(f.forward(z)) >= 1 for z in zs)


def test_self_intersection_reported_with_edges():
    with pytest.raises(SelfIntersectionError) as exc:
        make_polygon([(0, 0), (1, 1), (1, 0), (0, 1)])
    assert exc.value.edges == (0, 2)


def test_collinear_vertex_rejected():
    with pytest.raises(DegenerateVertexError):
        make_polygon([(0, 0), (1, 0), (2, 0), (1, 1)])


@pytest.mark.parametrize("verts", [[(0, 0), (1, 0)], [(0, 0), (0, 0), (1, 1)]])
def test_too_few_or_repeated_vertices(verts):
    with pytest.raises(PolygonError):
        make_polygon(verts)


def test_supplied_angles_must_agree():
    make_polygon(fx.UNIT_SQUARE, [0.5] * 4)
    with pytest.raises(PolygonError):
        make_polygon(fx.UNIT_SQUARE, [0.5, 0.5, 0.5, 0.6])


def test_horizontal_period_two():
    p = make_polygon(fx.UNIT_SQUARE)
    t = trace_billiard(p, 0.5 + 0.5j, 1, 6)
    assert t.status == "ok"
    assert detect_period(t) == 2
    assert abs(t.bounces[0].point - (1 + 0.5j)) < 1e-15
    assert abs(t.bounces[1].point - 0.5j) < 1e-15


def test_diamond_period_four():
    p = make_polygon(fx.UNIT_SQUARE)
    t = trace_billiard(p, fx.DIAMOND_START, fx.DIAMOND_DIRECTION, 9)
    assert t.status == "ok"
    assert detect_period(t) == 4


def test_centre_diagonal_hits_corner():
    # the literal (0.5, 0.5) / (1, 1) launch runs into a vertex
    p = make_polygon(fx.UNIT_SQUARE)
    t = trace_billiard(p, 0.5 + 0.5j, 1 + 1j, 4)
    assert t.status == "vertex_hit"
    assert t.bounces == []
    assert abs(0.5 + 0.5j + t.tail * (1 + 1j) / abs(1 + 1j) - (1 + 1j)) < 1e-12


def test_fagnano_period_three():
    p = fx.polygon("triangle")
    z0, d0 = fx.fagnano_launch(p)
    t = trace_billiard(p, z0, d0, 7)
    assert detect_period(t, 1e-9) == 3
    assert abs(t.bounces[3].point - t.bounces[0].point) < 1e-9
    assert abs(t.bounces[3].direction - t.bounces[0].direction) < 1e-9


def test_period_absent_for_generic_orbit():
    t = trace_billiard(fx.polygon("hexagon"), fx.HEXAGON_START, fx.HEXAGON_DIRECTION, 12)
    assert detect_period(t) is None


def test_start_must_be_interior():
    p = make_polygon(fx.UNIT_SQUARE)
    for z in (0.5, 1.5 + 0.5j, 0j):
        with pytest.raises(DomainError):
            trace_billiard(p, z, 1, 3)
    with pytest.raises(DomainError):
        trace_billiard(p, 0.5 + 0.5j, 0, 3)


def test_rationality():
    ok, fr = is_rational(make_polygon(fx.UNIT_SQUARE))
    assert ok and fr == (Fraction(1, 2),) * 4
    ok, fr = is_rational(make_polygon(fx.EQUILATERAL))
    assert ok and fr == (Fraction(1, 3),) * 3
    # one angle pi (1/sqrt 2 - 1e-3): no denominator <= 100 within 1e-9
    alpha = 1 / math.sqrt(2) - 1e-3
    apex = cmath.exp(1j * math.pi * alpha)
    tri = make_polygon([0, 1, apex])
    assert tri.alphas[0] == pytest.approx(alpha, abs=1e-12)
    ok, _ = is_rational(tri, 100)
    assert not ok


def test_polygon_json_roundtrip():
    p = fx.polygon("pentagon")
    q = make_polygon(p.to_dict()["vertices"])
    assert np.allclose(p.vertices, q.vertices) and np.allclose(p.alphas, q.alphas)


def _check_orbit(p, t):
    z = t.start
    for b in t.bounces:
        a, c = p.edge(b.edge)
        e = (c - a) / abs(c - a)
        # specular law: tangential part kept, normal part flipped
        d_in = (b.point - z) / abs(b.point - z)
        d_out = b.direction
        assert abs((d_in * e.conjugate()).real - (d_out * e.conjugate()).real) < 1e-12
        assert abs((d_in * e.conjugate()).imag + (d_out * e.conjugate()).imag) < 1e-12
        z = b.point
    assert t.total_length == pytest.approx(sum(t.segment_lengths), rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(
    name=st.sampled_from(["triangle", "square", "pentagon", "hexagon"]),
    u=st.floats(0.05, 0.95),
    v=st.floats(0.05, 0.95),
    theta=st.floats(0, 2 * math.pi),
)
def test_billiard_properties(name, u, v, theta):
    p = fx.polygon(name)
    z = p.vertices
    lo, hi = complex(z.real.min(), z.imag.min()), complex(z.real.max(), z.imag.max())
    start = complex(lo.real + u * (hi - lo).real, lo.imag + v * (hi - lo).imag)
    assume(p.contains(start) and p.boundary_distance(start) > 1e-3)
    t = trace_billiard(p, start, cmath.exp(1j * theta), 10)
    _check_orbit(p, t)
    pts = unfold_billiard(t)
    if len(pts) > 2:
        d = (pts[-1] - pts[0]) / abs(pts[-1] - pts[0])
        scale = abs(pts[-1] - pts[0])
        assert np.max(np.abs(((pts - pts[0]) * np.conj(d)).imag)) < 1e-9 * max(1, scale)
    if t.status == "ok" and len(t.bounces) >= 2:
        # time reversal: retrace from the last bounce backwards
        last = t.bounces[-1]
        back_start = last.point + 0.5 * (t.bounces[-2].point - last.point)
        r = trace_billiard(p, back_start, -(last.point - t.bounces[-2].point), len(t.bounces) - 1)
        fwd = [b.point for b in t.bounces[:-1]][::-1]
        got = [b.point for b in r.bounces][: len(fwd)]
        assert np.allclose(got, fwd[: len(got)], atol=1e-8)
