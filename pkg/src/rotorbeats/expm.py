"""Matrix exponential of small dense blocks by Taylor scaling and squaring."""
from __future__ import annotations

import math

import numpy as np

__all__ = ["expm_taylor"]

_SCALED_NORM = 0.5
_TOL = 1e-14


def _taylor_degree(norm):
    # smallest K with norm**(K+1)/(K+1)! * 1/(1 - norm/(K+2)) < _TOL
    k = 1
    term = norm
    while True:
        term *= norm / (k + 1)
        if term / (1.0 - norm / (k + 2)) < _TOL:
            return k
        k += 1


def expm_taylor(a):
    """exp(a) for a square complex matrix.

    The matrix is scaled by 2**-s until its 1-norm is at most 0.5, the
    truncated Taylor series is summed to a remainder below 1e-14, and the
    result is squared s times.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    norm = np.linalg.norm(a, 1) if n else 0.0
    s = 0
    if norm > _SCALED_NORM:
        s = int(math.ceil(math.log2(norm / _SCALED_NORM)))
    b = a / (2.0 ** s)
    degree = _taylor_degree(norm / 2.0 ** s) if norm > 0 else 0

    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, degree + 1):
        term = term @ b / k
        result = result + term
    for _ in range(s):
        result = result @ result
    return result
