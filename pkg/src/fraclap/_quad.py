"""Fixed quadrature tables: Gauss-Legendre on [0,1] and collapsed simplex rules."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss01(n):
    """n-point Gauss-Legendre rule on [0, 1] as (nodes, weights)."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def square_rule(n):
    """Tensor rule with n^2 points on [0,1]^2."""
    t, w = gauss01(n)
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    w1, w2 = np.meshgrid(w, w, indexing="ij")
    return np.stack([t1.ravel(), t2.ravel()], axis=1), (w1 * w2).ravel()


@lru_cache(maxsize=None)
def simplex_rule(d, n):
    """Collapsed tensor rule on the reference simplex.

    d=1: the segment [0,1].  d=2: the triangle {0 <= v <= u <= 1}, obtained
    from the square by (u, v) = (t1, t1*t2) with Jacobian t1.
    """
    if d == 1:
        t, w = gauss01(n)
        return t.reshape(-1, 1), w.copy()
    pts, wts = square_rule(n)
    u = pts[:, 0]
    v = pts[:, 0] * pts[:, 1]
    return np.stack([u, v], axis=1), wts * pts[:, 0]


def reference_basis(d, ref_pts):
    """Hat-function values at reference points, shape (d+1, npts).

    Vertex ordering matches the element maps: for d=2 the map is
    x = v0 + u*(v1-v0) + v*(v2-v1), with hats (1-u, u-v, v).
    """
    if d == 1:
        t = ref_pts[:, 0]
        return np.stack([1.0 - t, t])
    u, v = ref_pts[:, 0], ref_pts[:, 1]
    return np.stack([1.0 - u, u - v, v])


def kernel_pow(r2, s, d):
    """Evaluate r2**(-(d+2s)/2), using sqrt compositions for quarter exponents."""
    e = 0.5 * (d + 2.0 * s)
    quarters = 4.0 * e
    if quarters == np.round(quarters):
        q = int(round(quarters))
        out = np.ones_like(r2)
        base = r2
        for _ in range(q // 4):
            out = out * base
        rem = q % 4
        if rem:
            root = np.sqrt(r2)
            if rem == 2:
                out = out * root
            else:
                quarter = np.sqrt(root)
                out = out * (quarter if rem == 1 else root * quarter)
        return 1.0 / out
    return r2 ** (-e)
