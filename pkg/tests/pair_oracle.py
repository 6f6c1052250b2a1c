"""Independent reference for 2d touching-pair integrals.

Uses the relative-coordinate form: the pair integral over K x K' equals the
integral over z of |z|^(-2-2s) times the inner integral of the hat-difference
product over K intersected with (K' - z).  The inner integrand is quadratic in
x for fixed z, so a 3-point midpoint rule on a fan triangulation of the
clipped polygon is exact; the outer integral is done adaptively in polar
coordinates.  No code is shared with the package's transform routines.
"""

import numpy as np
from scipy.integrate import quad


def _clip(poly, a, b):
    """Sutherland-Hodgman clip of polygon by the half-plane left of a->b."""
    n = np.array([-(b[1] - a[1]), b[0] - a[0]])

    def inside(p):
        return np.dot(p - a, n) >= -1e-14

    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        pin, qin = inside(p), inside(q)
        if pin:
            out.append(p)
        if pin != qin:
            t = np.dot(a - p, n) / np.dot(q - p, n)
            out.append(p + t * (q - p))
    return out


def _intersect(tri1, tri2):
    poly = [np.asarray(v, float) for v in tri1]
    for k in range(3):
        if not poly:
            return []
        poly = _clip(poly, np.asarray(tri2[k], float), np.asarray(tri2[(k + 1) % 3], float))
    return poly


def _tri_quad_exact(f, a, b, c):
    """Integrate a quadratic over a triangle exactly (edge-midpoint rule)."""
    area = 0.5 * abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    mids = [0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)]
    return area * sum(f(m) for m in mids) / 3.0


def pair_integral(tri1, tri2, hat_x, hat_y_1, hat_x_2, hat_y_2, s,
                  eps=1e-9):
    """Reference value of the (a,b) pair integral.

    hat_x/hat_x_2: callables for psi_a, psi_b restricted to tri1 (or zero).
    hat_y_1/hat_y_2: the same hats restricted to tri2 (or zero).
    """
    t1 = [np.asarray(v, float) for v in tri1]
    t2 = [np.asarray(v, float) for v in tri2]

    diffs = [v2 - v1 for v2 in t2 for v1 in t1]
    hull = _convex_hull(diffs)

    def inner(z):
        shifted = [v - z for v in t2]
        poly = _intersect(t1, shifted)
        if len(poly) < 3:
            return 0.0

        def f(x):
            return ((hat_x(x) - hat_y_1(x + z))
                    * (hat_x_2(x) - hat_y_2(x + z)))

        total = 0.0
        for k in range(1, len(poly) - 1):
            total += _tri_quad_exact(f, poly[0], poly[k], poly[k + 1])
        return total

    def radial(theta):
        d = np.array([np.cos(theta), np.sin(theta)])
        rmax = _ray_exit(hull, d)
        if rmax <= 0.0:
            return 0.0

        def g(rho):
            z = rho * d
            return rho ** (-1.0 - 2.0 * s) * inner(z)

        val, _ = quad(g, 0.0, rmax, limit=400, epsabs=1e-13, epsrel=eps)
        return val

    val, _ = quad(radial, 0.0, 2.0 * np.pi, limit=400, epsabs=1e-12, epsrel=eps)
    return val


def _convex_hull(pts):
    pts = sorted((tuple(p) for p in pts))
    pts = [np.array(p) for p in pts]

    def half(points):
        out = []
        for p in points:
            while len(out) >= 2 and np.cross(out[-1] - out[-2], p - out[-2]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return lower[:-1] + upper[:-1]


def _ray_exit(hull, d):
    """Largest rho with rho*d inside the hull (0 if the ray leaves at once)."""
    m = len(hull)
    rmax = np.inf
    for i in range(m):
        a, b = hull[i], hull[(i + 1) % m]
        n = np.array([-(b[1] - a[1]), b[0] - a[0]])  # inward for ccw hull
        nd = np.dot(n, d)
        na = np.dot(n, a)
        if nd < -1e-15:
            rmax = min(rmax, na / nd if na / nd > 0 else 0.0)
        elif na < -1e-15 and nd <= 0:
            return 0.0
    if not np.isfinite(rmax):
        return 0.0
    return max(rmax, 0.0)


def linear_hat(tri, vertex_index):
    """Hat of local vertex `vertex_index` on the triangle, as a callable."""
    a = np.asarray(tri[vertex_index], float)
    b = np.asarray(tri[(vertex_index + 1) % 3], float)
    c = np.asarray(tri[(vertex_index + 2) % 3], float)
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def hat(p):
        return ((b[0] - p[0]) * (c[1] - p[1]) - (c[0] - p[0]) * (b[1] - p[1])) / det

    return hat


def zero_hat(p):
    return 0.0
