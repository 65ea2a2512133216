import functools
import math

import pytest

from optical_torus import _kernels_py, kernels
from optical_torus import fixtures as fx
from optical_torus.field import build_field
from optical_torus.schwarz import build_chart, rectangle_polygon

try:
    from optical_torus import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled
KERNEL_NAMES = ("sncndn", "sncndn_complex", "log_index_grad", "sc_factors")


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    mod = BACKENDS[request.param]
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@functools.lru_cache(maxsize=None)
def chart(name: str):
    if name == "triangle":
        return build_chart(fx.polygon("triangle"), 1.0 / math.sqrt(2.0))
    if name == "equilateral":
        return build_chart(fx.polygon("equilateral"), 1.0 / math.sqrt(2.0))
    if name == "square":
        return build_chart(fx.polygon("square"), fx.SQUARE_K)
    if name == "rectangle":
        return build_chart(rectangle_polygon(fx.RECTANGLE_K), fx.RECTANGLE_K)
    if name == "pentagon":
        return build_chart(fx.polygon("pentagon"), fx.PENTAGON_K, fx.PENTAGON_PIVOT)
    if name == "hexagon":
        return build_chart(fx.polygon("hexagon"), fx.HEXAGON_K, fx.HEXAGON_PIVOT)
    raise KeyError(name)


@functools.lru_cache(maxsize=None)
def field(name: str):
    return build_field(chart(name))


@pytest.fixture(scope="session")
def charts():
    return chart


@pytest.fixture(scope="session")
def fields():
    return field
