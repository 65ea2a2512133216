import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optical_torus.elliptic import incomplete_F, jacobi_sn
from optical_torus.errors import DomainError, SingularEvaluation
from optical_torus.field import (
    analytic_example_field,
    build_field,
    fold_to_rectangle,
    harmonicity_residual,
    wrap_to_domain,
)

from conftest import chart, field


def fit_slope(ts, vals) -> float:
    return float(np.polyfit(np.log(ts), np.log(vals), 1)[0])


def regular_points(f, count, seed, margin=0.05):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        w = complex(rng.uniform(-1, 1) * f.a, rng.uniform(0, 1) * f.b)
        if f.puncture_distance(w.real, w.imag)[0] > margin * min(f.a, f.b):
            out.append(w)
    return out


@pytest.mark.parametrize("name", ["triangle", "hexagon"])
def test_index_matches_finite_difference_of_inverse(name):
    f = field(name)
    c = f.chart
    h = 1e-5 * min(f.a, f.b)
    worst = 0.0
    for w in regular_points(f, 100, 11):
        fd = abs(c.inverse(w + h) - c.inverse(w - h)) / (2 * h)
        worst = max(worst, abs(fd - f.index_at(w)) / f.index_at(w))
    assert worst < 1e-6


def test_index_is_modulus_of_chart_derivative(backend):
    f = field("pentagon")
    for w in regular_points(f, 30, 2):
        eta = jacobi_sn(w, f.modulus).value
        assert f.index_at(w) == pytest.approx(1 / abs(f.chart.derivative_at_eta(eta)), rel=1e-12)


def test_triangle_factors():
    f = field("triangle")
    al = f.chart.sc.target.alphas
    assert len(f.factors) == 4
    assert np.allclose(f.exponents, [al[0] - 0.5, al[1] - 0.5, al[2] - 0.5, 0.5])
    assert al[2] == pytest.approx(1 - (al[0] + al[1]), abs=1e-14)
    assert abs(f.exponent_sum()) < 1e-14


def test_hexagon_factors():
    f = field("hexagon")
    assert len(f.factors) == 4 + 3
    assert abs(np.sum(f.exponents)) < 1e-13
    k = f.modulus.k
    assert f.centers[:4].tolist() == [-1 / k, -1.0, 1.0, 1 / k]


def test_exponent_sum_exact_for_rational_polygons():
    assert field("equilateral").exponent_sum() == Fraction(0)
    assert field("square").exponent_sum() == Fraction(0)


def test_rectangle_field_is_constant():
    f = field("rectangle")
    vals = [f.index_at(complex(-f.a + 2 * f.a * (i + 0.5) / 20, f.b * (j + 0.5) / 20))
            for i in range(20) for j in range(20)]
    spread = (max(vals) - min(vals)) / np.mean(vals)
    assert spread < 1e-8
    # similarity ratio |dz/dw| of the identity-sized rectangle
    assert np.mean(vals) == pytest.approx(1.0, rel=1e-9)
    assert f.potential_at(0.1, 0.2) == pytest.approx(-0.5, rel=1e-9)


@pytest.mark.parametrize("name", ["triangle", "hexagon"])
def test_zero_at_R4_exponent(name):
    f = field(name)
    k = f.modulus.k
    ts = np.logspace(-8, -4, 9)
    for theta in (0.4, 1.5, 2.7):
        vals = [f.index_at(incomplete_F(1 / k + t * cmath.exp(1j * theta), f.modulus)) for t in ts]
        assert fit_slope(ts, vals) == pytest.approx(0.5, abs=0.01)


def test_corner_singularities_reported():
    f = field("triangle")
    R = f.modulus.corners
    for p in f.punctures_in_rectangle():
        if p.kind != "corner":
            continue
        with pytest.raises(SingularEvaluation) as exc:
            f.index_at(R[p.label])
        lim = exc.value.limit
        if p.exponent > 0:
            assert lim == 0.0
        elif p.exponent < 0:
            assert lim == math.inf
    # acute triangle: alpha < 1/2 gives wells at R1..R3, R4 is a zero
    assert [p.exponent < 0 for p in f.catalog[:4]] == [True, True, True, False]


def test_pole_has_finite_limit():
    f = field("hexagon")
    with pytest.raises(SingularEvaluation) as exc:
        f.index_at(complex(0, f.b))
    assert exc.value.limit == f.scale
    errs = [abs(f.index_at(complex(0, f.b) + d * cmath.exp(-0.7j)) - f.scale) for d in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-3 * f.scale


def test_outside_rectangle_refused():
    f = field("triangle")
    with pytest.raises(DomainError):
        f.index_at(complex(f.a * 1.1, 0.1))


def test_extension_symmetries_and_periods():
    f = field("hexagon")
    a, b = f.a, f.b
    for w in regular_points(f, 40, 4):
        u, v = w.real, w.imag
        n = f.index_at(w)
        assert f.extended_index_at(u, v) == pytest.approx(n, rel=1e-15)
        assert f.extended_index_at(2 * a - u, v) == pytest.approx(n, rel=1e-13)
        assert f.extended_index_at(u, 2 * b - v) == pytest.approx(n, rel=1e-13)
        assert f.extended_index_at(2 * a - u, 2 * b - v) == pytest.approx(n, rel=1e-13)
        assert f.extended_index_at(u + 4 * a, v - 2 * b) == pytest.approx(n, rel=1e-12)


def _welding_heights(f, count):
    vs = np.linspace(0.02, 0.98, count) * f.b
    return [v for v in vs if f.puncture_distance(f.a, v)[0] > 0.02 * f.b]


def test_welding_line_continuity():
    f = field("hexagon")
    vs = _welding_heights(f, 60)[:50]
    assert len(vs) == 50
    for v in vs:
        left = f.extended_index_at(f.a - 1e-12, v)
        right = f.extended_index_at(f.a + 1e-12, v)
        assert abs(left - right) < 1e-8 * left


def test_normal_derivative_flips_across_welding_line():
    f = field("hexagon")
    vs = _welding_heights(f, 30)[:20]
    assert len(vs) == 20
    for v in vs:
        _, gl, _ = f.index_and_log_gradient(f.a - 1e-3, v)
        _, gr, _ = f.index_and_log_gradient(f.a + 1e-3, v)
        assert gl * gr < 0
        assert gl == pytest.approx(-gr, rel=1e-10)


def test_normal_derivative_vanishes_on_welding_line():
    # the right side of R is a real-analytic arc of the polygon boundary's image,
    # so the mirror extension is C1 there: the one-sided slopes shrink linearly
    f = field("hexagon")
    for v in _welding_heights(f, 30)[:20]:
        g1 = f.index_and_log_gradient(f.a - 1e-3, v)[1]
        g2 = f.index_and_log_gradient(f.a - 1e-4, v)[1]
        assert g1 / g2 == pytest.approx(10.0, rel=0.02)


def test_potential():
    f = field("triangle")
    for w in regular_points(f, 30, 8):
        assert f.potential_at(w.real, w.imag) == pytest.approx(-0.5 * f.index_at(w) ** 2, rel=1e-14)
        assert f.potential_at(w.real, w.imag) < 0
    R4 = f.modulus.corners["R4"]
    assert f.potential_at(R4.real, R4.imag) == 0.0
    R1 = f.modulus.corners["R1"]
    with pytest.raises(SingularEvaluation):
        f.potential_at(R1.real, R1.imag)


@pytest.mark.parametrize("name,count", [("triangle", 6), ("square", 8), ("pentagon", 10), ("hexagon", 12)])
def test_catalog_counts(name, count):
    cat = field(name).singular_catalog()
    assert len(cat) == count == 2 * chart(name).sc.n


def test_catalog_layout():
    f = field("hexagon")
    a, b = f.a, f.b
    cat = {p.label: p for p in f.singular_catalog()}
    assert {"A", "A'", "B", "B'", "C", "C'", "D", "D'", "R1", "R2", "R3", "R4"} == set(cat)
    assert cat["D"].location == complex(0, b) and cat["D'"].location == complex(2 * a, b)
    for label in "ABC":
        p, q = cat[label], cat[label + "'"]
        assert p.twin == q.label and q.twin == p.label
        if p.side == "right":
            # meridian through R3-R4 and its mirror
            assert p.location.real == a and q.location == complex(a, 2 * b - p.location.imag)
        else:
            # parallel through R1-R4 and its mirror
            assert p.location.imag == b and q.location == complex(2 * a - p.location.real, b)
    assert cat["R1"].location == complex(-a, b)


def test_field_metadata_is_json_ready():
    meta = field("hexagon").metadata()
    assert len(meta["catalog"]) == 12 and len(meta["factors"]) == 7


def test_analytic_example_values():
    f = analytic_example_field()
    assert f.index_at(1j) == 1.0
    assert f.index_at(complex(0.3, 0.4)) == pytest.approx(2.0, rel=1e-15)
    assert abs(f.derivative(0)) == 1.0
    assert f.index_at(f.forward(0)) == pytest.approx(1 / abs(f.forward(0)), rel=1e-15)
    for z in (0.3 + 0.7j, 1.1 + 0.25j):
        w = f.forward(z)
        assert w == pytest.approx(complex(math.exp(-z.real) * math.sin(z.imag), math.exp(-z.real) * math.cos(z.imag)))
        assert f.inverse(w) == pytest.approx(z, abs=1e-15)
        assert f.index_at(w) == pytest.approx(1 / abs(f.derivative(z)), rel=1e-14)
    with pytest.raises(SingularEvaluation):
        f.index_at(0)


def test_harmonicity_analytic_quadratic():
    f = analytic_example_field()
    c = f.forward(f.corner + 0.5 * f.side * (1 + 1j))
    r = [harmonicity_residual(f, h, c, 0.1) for h in (0.02, 0.01)]
    assert r[0] / r[1] == pytest.approx(4.0, rel=0.05)


def test_harmonicity_constant_field_is_zero():
    f = field("rectangle")
    assert harmonicity_residual(f, 0.02, complex(0, 0.5 * f.b), 0.2) < 1e-9


def test_harmonicity_hexagon_order():
    f = field("hexagon")
    r = [harmonicity_residual(f, h, complex(0, 0.5 * f.b), 0.3 * f.b) for h in (0.02, 0.01, 0.005)]
    orders = [math.log2(r0 / r1) for r0, r1 in zip(r, r[1:])]
    assert min(orders) >= 1.9


def test_harmonicity_region_must_avoid_punctures():
    f = field("hexagon")
    with pytest.raises(DomainError):
        harmonicity_residual(f, 0.01, complex(0, 0.9 * f.b), 0.2 * f.b)


@settings(max_examples=200, deadline=None)
@given(u=st.floats(-20, 20), v=st.floats(-20, 20))
def test_fold_lands_in_rectangle(u, v):
    a, b = 1.3, 0.7
    uw, vw = wrap_to_domain(u, v, a, b)
    assert -a <= uw < 3 * a + 1e-12 and 0 <= vw < 2 * b + 1e-12
    uf, vf, su, sv = fold_to_rectangle(u, v, a, b)
    assert -a - 1e-12 <= uf <= a + 1e-12 and -1e-12 <= vf <= b + 1e-12
    assert su in (-1, 1) and sv in (-1, 1)


@settings(max_examples=60, deadline=None)
@given(s=st.floats(0.05, 0.95), t=st.floats(0.05, 0.95))
def test_log_gradient_matches_difference(s, t):
    f = field("pentagon")
    u, v = -f.a + 2 * f.a * s, f.b * t
    if f.puncture_distance(u, v)[0] < 0.05 * f.b:
        return
    _, gu, gv = f.index_and_log_gradient(u, v)
    h = 1e-6
    du = (f.log_index(u + h, v) - f.log_index(u - h, v)) / (2 * h)
    dv = (f.log_index(u, v + h) - f.log_index(u, v - h)) / (2 * h)
    assert abs(du - gu) < 1e-6 * max(1, abs(gu)) and abs(dv - gv) < 1e-6 * max(1, abs(gv))


def test_kernel_backends_agree(backend):
    from conftest import BACKENDS

    f = field("hexagon")
    ref = BACKENDS["python"]
    from optical_torus import kernels

    for w in regular_points(f, 50, 9, margin=0.01):
        args = (w.real, w.imag, f.modulus.k, f.modulus.k_prime, f.b, f.centers, f.exponents)
        got = kernels.log_index_grad(*args)
        exp = ref.log_index_grad(*args)
        assert np.allclose(got, exp, rtol=1e-12, atol=1e-12)
