"""Cached Gauss rules on [-1, 1]."""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return x, w


@lru_cache(maxsize=256)
def gauss_jacobi(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the weight ``(1 - t)^alpha (1 + t)^beta``."""
    if alpha == 0.0 and beta == 0.0:
        return gauss_legendre(n)
    x, w = roots_jacobi(n, alpha, beta)
    return x, w
