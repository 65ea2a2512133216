# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference versions."""

import numpy as np

cimport numpy as cnp
from libc.math cimport asin, atan2, cos, exp, fabs, log, sin, sqrt

cnp.import_array()

cdef double _LANDEN_EPS = 2.0 ** -53
cdef enum:
    MAX_LANDEN = 16


cdef void _sncndn(double u, double k, double *sn, double *cn, double *dn) noexcept nogil:
    cdef double a[MAX_LANDEN + 1]
    cdef double c[MAX_LANDEN + 1]
    cdef double kp2, b, an, phi
    cdef int n = 0
    if k == 0.0:
        sn[0] = sin(u)
        cn[0] = cos(u)
        dn[0] = 1.0
        return
    kp2 = (1.0 - k) * (1.0 + k)
    a[0] = 1.0
    c[0] = k
    b = sqrt(kp2)
    while fabs(c[n]) > _LANDEN_EPS * a[n] and n < MAX_LANDEN:
        an = a[n]
        a[n + 1] = 0.5 * (an + b)
        c[n + 1] = 0.5 * (an - b)
        b = sqrt(an * b)
        n += 1
    phi = (2.0 ** n) * a[n] * u
    while n > 0:
        phi = 0.5 * (phi + asin(c[n] / a[n] * sin(phi)))
        n -= 1
    sn[0] = sin(phi)
    cn[0] = cos(phi)
    dn[0] = sqrt(kp2 + k * k * cn[0] * cn[0])


cdef void _sncndn_complex(double u, double v, double k, double kp,
                          double complex *sn, double complex *cn,
                          double complex *dn) noexcept nogil:
    cdef double s, c, d, s1, c1, d1, den
    _sncndn(u, k, &s, &c, &d)
    _sncndn(v, kp, &s1, &c1, &d1)
    den = c1 * c1 + k * k * s * s * s1 * s1
    sn[0] = (s * d1 + 1j * (c * d * s1 * c1)) / den
    cn[0] = (c * c1 - 1j * (s * d * s1 * d1)) / den
    dn[0] = (d * c1 * d1 - 1j * (k * k * s * c * s1)) / den


def sncndn(double u, double k):
    cdef double s, c, d
    _sncndn(u, k, &s, &c, &d)
    return s, c, d


def sncndn_complex(double u, double v, double k, double kp):
    cdef double complex s, c, d
    _sncndn_complex(u, v, k, kp, &s, &c, &d)
    return s, c, d


def log_index_grad(double u, double v, double k, double kp, double b,
                   const double[::1] centers, const double[::1] exps):
    # centers[:4] are the corner prevertices; see the reference version
    cdef double complex eta, cn, dn, deta, d, phi = 0.0, acc = 0.0
    cdef double S = 0.0
    cdef Py_ssize_t j, m = centers.shape[0]
    if v <= 0.5 * b:
        _sncndn_complex(u, v, k, kp, &eta, &cn, &dn)
        deta = cn * dn
        for j in range(m):
            d = eta - centers[j]
            if (j == 1 or j == 2) and d.real * d.real + d.imag * d.imag < 0.25:
                if j == 1:
                    d = cn * cn / (1.0 - eta)
                else:
                    d = -cn * cn / (1.0 + eta)
            S += exps[j] * log(sqrt(d.real * d.real + d.imag * d.imag))
            phi += exps[j] / d
        phi *= deta
    else:
        _sncndn_complex(u, v - b, k, kp, &eta, &cn, &dn)
        deta = k * cn * dn
        for j in range(m):
            d = 1.0 - centers[j] * k * eta
            if (j == 0 or j == 3) and d.real * d.real + d.imag * d.imag < 0.25:
                if j == 0:
                    d = cn * cn / (1.0 - eta)
                else:
                    d = cn * cn / (1.0 + eta)
            S += exps[j] * log(sqrt(d.real * d.real + d.imag * d.imag))
            acc += exps[j] * centers[j] / d
        phi = -deta * acc
    return S, phi.real, -phi.imag


def sc_factors(zeta, const double[::1] prevertices, const double[::1] exponents):
    zarr = np.ascontiguousarray(zeta, dtype=np.complex128)
    shape = zarr.shape
    cdef double complex[::1] z = zarr.reshape(-1)
    out = np.empty(z.shape[0], dtype=np.complex128)
    cdef double complex[::1] res = out
    cdef Py_ssize_t i, j, n = z.shape[0], m = prevertices.shape[0]
    cdef double re, im, lm, ar, zr, zi
    for i in range(n):
        zr = z[i].real
        zi = z[i].imag
        if not zi > 0.0:
            zi = 0.0
        lm = 0.0
        ar = 0.0
        for j in range(m):
            re = zr - prevertices[j]
            lm += exponents[j] * 0.5 * log(re * re + zi * zi)
            ar += exponents[j] * atan2(zi, re)
        res[i] = exp(lm) * (cos(ar) + 1j * sin(ar))
    return out.reshape(shape)
