"""Probabilists' Hermite polynomials and Wiener-chaos product combinatorics."""

from __future__ import annotations

import math

import numpy as np


def hermite_eval(q: int, x):
    """Evaluate the probabilists' Hermite polynomial H_q at x.

    Uses the three-term recurrence H_{k+1}(x) = x*H_k(x) - k*H_{k-1}(x),
    which is stable for moderate q and large |x| (unlike the explicit
    coefficient sum).  H_0 = 1, H_1 = x, H_2 = x^2 - 1, ...

    x may be a scalar or an ndarray; the result has the same shape.
    """
    if q < 0:
        raise ValueError(f"Hermite order must be >= 0, got {q}")
    arr = np.asarray(x, dtype=float)
    h_prev = np.ones_like(arr)
    if q == 0:
        return float(h_prev) if arr.ndim == 0 else h_prev
    h = arr.copy()
    for k in range(1, q):
        h, h_prev = arr * h - k * h_prev, h
    return float(h) if arr.ndim == 0 else h


def product_formula_coeffs(p: int, q: int) -> list[tuple[int, int]]:
    """Expansion coefficients of a product of two multiple integrals.

    I_p(f) I_q(g) expands over chaoses of order p+q-2r with integer
    coefficients r! C(p,r) C(q,r), r = 0..min(p,q).  Returns the list
    [(r, coeff)] with exact (arbitrary-precision) integers.
    """
    if p < 1 or q < 1:
        raise ValueError(f"orders must be >= 1, got p={p}, q={q}")
    return [
        (r, math.factorial(r) * math.comb(p, r) * math.comb(q, r))
        for r in range(min(p, q) + 1)
    ]


def hermite_covariance(q: int, rho: float) -> float:
    """E[H_q(X) H_q(Y)] = q! rho^q for jointly standard normal (X, Y).

    rho is the correlation of the pair; |rho| <= 1 required.
    """
    if abs(rho) > 1:
        raise ValueError(f"|rho| must be <= 1, got {rho}")
    return math.factorial(q) * rho**q
