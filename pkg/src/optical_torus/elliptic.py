"""Elliptic integrals of the first kind and the Jacobi sn function.

Conventions: ``F(eta; k)`` maps the closed upper half-plane onto the
rectangle ``[-a, a] x [0, b]`` with ``a = K(k)``, ``b = K(k')`` and corners

    F(-1/k) = -a + ib,  F(-1) = -a,  F(1) = a,  F(1/k) = a + ib,

and ``sn`` is its inverse, with a simple pole at ``ib``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.special import elliprf, ellipkm1

from . import kernels
from .errors import BranchPointError, DomainError

K_MIN = 1e-6
K_MAX = 1.0 - 1e-6

# radius of the sn-pole neighbourhood, relative to b
POLE_RADIUS = 1e-6


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind."""
    if not 0.0 <= k < 1.0:
        raise DomainError(f"complete_K needs 0 <= k < 1, got {k!r}")
    # parameter 1 - m formed without cancellation
    return float(ellipkm1((1.0 - k) * (1.0 + k)))


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus ``k`` with its complement and the quarter periods a = K(k), b = K(k')."""

    k: float
    k_prime: float
    a: float
    b: float

    @classmethod
    def from_k(cls, k: float) -> "EllipticModulus":
        k = float(k)
        if not K_MIN <= k <= K_MAX:
            raise DomainError(f"modulus k={k!r} outside [{K_MIN}, {K_MAX}]: rectangle degenerates")
        kp = math.sqrt((1.0 - k) * (1.0 + k))
        return cls(k, kp, complete_K(k), complete_K(kp))

    @property
    def corners(self) -> dict[str, complex]:
        a, b = self.a, self.b
        return {"R1": complex(-a, b), "R2": complex(-a, 0.0), "R3": complex(a, 0.0), "R4": complex(a, b)}

    @property
    def prevertex_corners(self) -> tuple[float, float, float, float]:
        return (-1.0 / self.k, -1.0, 1.0, 1.0 / self.k)

    @property
    def pole(self) -> complex:
        return complex(0.0, self.b)


def _modulus(k) -> EllipticModulus:
    return k if isinstance(k, EllipticModulus) else EllipticModulus.from_k(k)


def _F_real_unit(x: float, k: float) -> float:
    # F(x; k) for real |x| <= 1
    return x * float(elliprf(1.0 - x * x, 1.0 - k * k * x * x, 1.0))


def _F_boundary(x: float, m: EllipticModulus) -> complex:
    """Upper-half-plane boundary limit of F at a real point."""
    if x < 0.0:
        return -_F_boundary(-x, m).conjugate()
    k = m.k
    if x <= 1.0:
        return complex(_F_real_unit(x, k), 0.0)
    if x <= 1.0 / k:
        s = math.sqrt(max(0.0, 1.0 - 1.0 / (x * x))) / m.k_prime
        return complex(m.a, _F_real_unit(min(s, 1.0), m.k_prime))
    return complex(_F_real_unit(1.0 / (k * x), k), m.b)


def incomplete_F(eta: complex, k) -> complex:
    """Incomplete elliptic integral ``F(eta; k)`` on the closed upper half-plane."""
    m = _modulus(k)
    eta = complex(eta)
    if eta.imag < 0.0:
        raise DomainError(f"incomplete_F is defined on Im(eta) >= 0, got {eta!r}")
    if eta.imag == 0.0:
        return _F_boundary(eta.real, m)
    if abs(eta) * math.sqrt(m.k) > 1.0:
        # F(eta) = ib + conj F(1/(k conj eta)), which keeps the Carlson arguments bounded
        zeta = 1.0 / (m.k * eta.conjugate())
        return complex(0.0, m.b) + _F_interior(zeta, m.k).conjugate()
    return _F_interior(eta, m.k)


def _F_interior(eta: complex, k: float) -> complex:
    e2 = eta * eta
    return eta * complex(elliprf(1.0 - e2, 1.0 - k * k * e2, 1.0))


def dF_deta(eta: complex, k) -> complex:
    """``(1 - eta^2)^(-1/2) (1 - k^2 eta^2)^(-1/2)`` on the same branch as ``incomplete_F``."""
    m = _modulus(k)
    eta = complex(eta)
    if eta.imag < 0.0:
        raise DomainError(f"dF_deta is defined on Im(eta) >= 0, got {eta!r}")
    z1 = 1.0 - eta * eta
    z2 = 1.0 - m.k * m.k * eta * eta
    if eta.imag == 0.0:
        x = eta.real
        if x * x == 1.0 or (m.k * x) ** 2 == 1.0:
            raise BranchPointError(f"dF/deta is singular at eta = {x!r}")
        # signed zeros select the limit from above
        tiny = -math.copysign(0.0, x)
        z1 = complex(z1.real, tiny)
        z2 = complex(z2.real, tiny)
    return 1.0 / (cmath.sqrt(z1) * cmath.sqrt(z2))


class SnValue(NamedTuple):
    value: complex
    near_pole: bool


def _reduce(w: complex, m: EllipticModulus) -> tuple[float, float]:
    four_a, two_b = 4.0 * m.a, 2.0 * m.b
    u = w.real - four_a * round(w.real / four_a)
    v = w.imag - two_b * round(w.imag / two_b)
    return u, v


def jacobi_sn(w: complex, k) -> SnValue:
    """Jacobi ``sn(w; k)`` for complex ``w``.

    Points in the upper or lower half of each period cell are evaluated
    through ``sn(w) = 1 / (k sn(w - ib))`` so accuracy holds up near the
    poles. The returned flag is set within ``POLE_RADIUS * b`` of a pole;
    at the pole itself the value is complex infinity.
    """
    m = _modulus(k)
    u, v = _reduce(complex(w), m)
    if abs(v) <= 0.5 * m.b:
        s, _, _ = kernels.sncndn_complex(u, v, m.k, m.k_prime)
        return SnValue(s, False)
    v_shift = v - math.copysign(m.b, v)
    du = u - 2.0 * m.a * round(u / (2.0 * m.a))
    near = math.hypot(du, v_shift) < POLE_RADIUS * m.b
    s, _, _ = kernels.sncndn_complex(u, v_shift, m.k, m.k_prime)
    mu = m.k * s
    if mu == 0:
        return SnValue(complex(math.inf, 0.0), True)
    return SnValue(1.0 / mu, near)


def sn_derivative(w: complex, k) -> complex:
    """``d sn / dw = cn(w) dn(w)``; raises at a pole."""
    m = _modulus(k)
    u, v = _reduce(complex(w), m)
    s, c, d = kernels.sncndn_complex(u, v, m.k, m.k_prime)
    return c * d
