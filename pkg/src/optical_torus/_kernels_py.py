"""Pure-Python implementations of the hot numerical kernels.

These mirror ``_kernels.pyx`` one-to-one and are used whenever the compiled
extension is unavailable (or disabled with ``OPTICAL_TORUS_PURE=1``).
"""

import math

import numpy as np

# stop the descending Landen sequence once c_n / a_n drops below this
_LANDEN_EPS = 2.0**-53
_MAX_LANDEN = 16


def sncndn(u, k):
    """Real Jacobi sn, cn, dn by the descending Landen (AGM) scheme."""
    if k == 0.0:
        return math.sin(u), math.cos(u), 1.0
    kp2 = (1.0 - k) * (1.0 + k)
    a = [1.0]
    c = [k]
    b = math.sqrt(kp2)
    n = 0
    while abs(c[n]) > _LANDEN_EPS * a[n] and n < _MAX_LANDEN:
        an = a[n]
        a.append(0.5 * (an + b))
        c.append(0.5 * (an - b))
        b = math.sqrt(an * b)
        n += 1
    phi = (2.0**n) * a[n] * u
    while n > 0:
        phi = 0.5 * (phi + math.asin(c[n] / a[n] * math.sin(phi)))
        n -= 1
    sn = math.sin(phi)
    cn = math.cos(phi)
    # dn^2 = k'^2 + k^2 cn^2 avoids the 0/0 of cos(phi0)/cos(phi1 - phi0) near u = K
    dn = math.sqrt(kp2 + k * k * cn * cn)
    return sn, cn, dn


def sncndn_complex(u, v, k, kp):
    """sn, cn, dn at w = u + iv via the imaginary-argument addition formulas."""
    s, c, d = sncndn(u, k)
    s1, c1, d1 = sncndn(v, kp)
    den = c1 * c1 + k * k * s * s * s1 * s1
    sn = complex(s * d1, c * d * s1 * c1) / den
    cn = complex(c * c1, -s * d * s1 * d1) / den
    dn = complex(d * c1 * d1, -k * k * s * c * s1) / den
    return sn, cn, dn


def log_index_grad(u, v, k, kp, b, centers, exps):
    """Log of the normalized index and its (u, v) gradient at w = u + iv in R.

    Returns ``(S, du, dv)`` with ``S = sum e_j log|sn(w) - c_j|``. The upper
    half of the rectangle is evaluated through mu = 1/sn(w) = k sn(w - ib),
    which is regular at the pole of sn; the two forms agree because the
    exponents sum to zero. ``centers[:4]`` must be the corner prevertices
    (-1/k, -1, 1, 1/k): near a corner the factor is a difference of nearly
    equal numbers, so it is formed from cn^2 = 1 - sn^2 instead.
    """
    if v <= 0.5 * b:
        eta, cn, dn = sncndn_complex(u, v, k, kp)
        deta = cn * dn
        S = 0.0
        phi = 0j
        for j, (c_j, e_j) in enumerate(zip(centers, exps)):
            d = eta - c_j
            if abs(d) < 0.5 and j in (1, 2):
                d = cn * cn / (1.0 - eta) if j == 1 else -cn * cn / (1.0 + eta)
            S += e_j * math.log(abs(d))
            phi += e_j / d
        phi *= deta
    else:
        s, cn, dn = sncndn_complex(u, v - b, k, kp)
        mu = k * s
        dmu = k * cn * dn
        S = 0.0
        acc = 0j
        for j, (c_j, e_j) in enumerate(zip(centers, exps)):
            d = 1.0 - c_j * mu
            if abs(d) < 0.5 and j in (0, 3):
                d = cn * cn / (1.0 - s) if j == 0 else cn * cn / (1.0 + s)
            S += e_j * math.log(abs(d))
            acc += e_j * c_j / d
        phi = -dmu * acc
    return S, phi.real, -phi.imag


def sc_factors(zeta, prevertices, exponents):
    """prod_i (zeta - a_i)^beta_i on the closed upper half-plane branch.

    Each factor's argument is taken in [0, pi]; a negative zero or rounding
    noise in Im(zeta) is clamped so real points left of a_i get arg = pi.
    """
    zeta = np.asarray(zeta, dtype=complex)
    re = zeta.real[..., None] - np.asarray(prevertices)
    im = np.broadcast_to(zeta.imag[..., None], re.shape)
    im = np.where(im > 0.0, im, 0.0)
    logmod = 0.5 * np.log(re * re + im * im)
    arg = np.arctan2(im, re)
    beta = np.asarray(exponents)
    return np.exp(logmod @ beta + 1j * (arg @ beta))
