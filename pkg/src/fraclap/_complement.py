"""The exterior weight w(x) = integral over the domain complement of |x-y|^(-d-2s).

In 1d the weight and its element integrals are analytic.  In 2d the weight is
evaluated by polar integration around x: the angular range is split at the
directions of the polygon corners so each panel integrand is analytic, and the
radial integral reduces to an alternating sum of crossing distances to powers
(the tail beyond the last crossing is included analytically).

Element integrals of phi_a*phi_b*w need care near the boundary, where
w ~ dist^(-2s): elements touching the boundary are covered by dyadically
graded cells (strips towards a boundary edge, shrinking simplices towards a
boundary vertex), which keeps every cell's integrand smooth at its own scale.
"""

from __future__ import annotations

import numpy as np

from scipy import special

from ._quad import reference_basis, simplex_rule, square_rule

_LEVELS = 16


def omega_1d(x, s):
    x = np.asarray(x, dtype=np.float64)
    return (x ** (-2.0 * s) + (1.0 - x) ** (-2.0 * s)) / (2.0 * s)


def omega_2d(polygon, pts, s, chunk=16384):
    """Exterior weight at strictly interior points, vectorized and analytic.

    polygon: (nc, 2) corner coordinates, counter-clockwise.
    pts: (m, 2) evaluation points.

    The angular range around each point is split at the corner directions;
    between two corner directions every ray crosses the same edges in the
    same order, the radial integral of the kernel is an alternating sum of
    crossing distances to the power -2s, and each crossing distance is
    a_k / sin(theta - beta_k) for its edge line.  The angular integral of
    sin(theta - beta)^(2s) is an incomplete beta function, so no quadrature
    is involved.
    """
    pts = np.atleast_2d(pts)
    out = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        out[lo:lo + chunk] = _omega_2d_chunk(polygon, pts[lo:lo + chunk], s)
    return out


def _sin_power_primitive(phi, alpha):
    """Integral of sin(u)^alpha over [0, phi] for phi in [0, pi]."""
    phi = np.clip(phi, 0.0, np.pi)
    reflected = np.minimum(phi, np.pi - phi)
    x = np.sin(reflected) ** 2
    a = 0.5 * (alpha + 1.0)
    total = special.beta(a, 0.5)
    partial = 0.5 * total * special.betainc(a, 0.5, x)
    return np.where(phi <= 0.5 * np.pi, partial, total - partial)


def _omega_2d_chunk(polygon, pts, s):
    corners = np.asarray(polygon, dtype=np.float64)
    edge_a = corners
    edge_b = np.roll(corners, -1, axis=0)
    seg = edge_b - edge_a
    m = len(pts)
    nc = len(corners)

    ang = np.arctan2(corners[None, :, 1] - pts[:, None, 1],
                     corners[None, :, 0] - pts[:, None, 0])
    ang = np.sort(ang, axis=1)
    hi = np.concatenate([ang[:, 1:], ang[:, :1] + 2.0 * np.pi], axis=1)
    mid = 0.5 * (ang + hi)

    # Crossing pattern of the mid-panel ray; it is combinatorially constant
    # across the panel because pattern changes happen at corner directions.
    d = np.stack([np.cos(mid), np.sin(mid)], axis=2)           # (m, nc, 2)
    rel = edge_a[None, None, :, :] - pts[:, None, None, :]      # (m, 1, ne, 2)
    segb = seg[None, None, :, :]
    denom = d[:, :, None, 0] * segb[..., 1] - d[:, :, None, 1] * segb[..., 0]
    cross_rel_seg = rel[..., 0] * segb[..., 1] - rel[..., 1] * segb[..., 0]
    cross_rel_d = rel[..., 0] * d[:, :, None, 1] - rel[..., 1] * d[:, :, None, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross_rel_seg / denom
        u = cross_rel_d / denom
    valid = (np.abs(denom) > 1e-300) & (u >= 0.0) & (u < 1.0) & (t > 0.0)
    t = np.where(valid, t, np.inf)
    order_idx = np.argsort(t, axis=2)
    t_sorted = np.take_along_axis(t, order_idx, axis=2)

    # Perpendicular distance to each edge line and the ray-to-edge angle,
    # oriented so the mid-panel ray makes an angle phi_mid in (0, pi); the
    # panel then spans phi_mid -/+ half the panel width.
    perp = np.abs(rel[..., 0] * segb[..., 1] - rel[..., 1] * segb[..., 0]) \
        / np.linalg.norm(seg, axis=1)[None, None, :]            # (m, 1, ne)
    beta0 = np.arctan2(seg[:, 1], seg[:, 0])[None, None, :]
    phi_mid = (mid[:, :, None] - beta0) % (2.0 * np.pi)
    phi_mid = np.where(phi_mid > np.pi, phi_mid - np.pi, phi_mid)
    half = 0.5 * (hi - ang)[:, :, None]
    alpha = 2.0 * s
    with np.errstate(divide="ignore", invalid="ignore"):
        angular = (_sin_power_primitive(phi_mid + half, alpha)
                   - _sin_power_primitive(phi_mid - half, alpha)) * perp ** (-alpha)
    angular = np.broadcast_to(angular, t.shape).copy()
    angular_sorted = np.take_along_axis(angular, order_idx, axis=2)
    signs = np.where(np.arange(nc) % 2 == 0, 1.0, -1.0)
    with np.errstate(invalid="ignore"):
        contrib = np.where(np.isfinite(t_sorted), signs * angular_sorted, 0.0)
    return contrib.sum(axis=(1, 2)) / (2.0 * s)


def _power_int(p, a, b):
    """Integral of x^p over [a, b] with 0 <= a < b, stable across p = -1."""
    if a == 0.0:
        return b ** (p + 1.0) / (p + 1.0)
    q = p + 1.0
    if abs(q) < 1e-9:
        r = np.log(b / a)
        return a ** q * r * (1.0 + 0.5 * q * r)
    return a ** q * np.expm1(q * np.log(b / a)) / q


def _poly_mul(p, q):
    return (p[0] * q[0], p[0] * q[1] + p[1] * q[0], p[1] * q[1])


def omega_element_tables_1d(mesh, s):
    """Exact local matrices of the weighted mass term, shape (ne, 2, 2).

    Rows and columns of boundary vertices are zeroed; their weight integrals
    diverge and they carry no dof.
    """
    ne = mesh.num_elements
    out = np.zeros((ne, 2, 2))
    for e, (v0, v1) in enumerate(mesh.elements):
        xl, xr = mesh.vertices[v0, 0], mesh.vertices[v1, 0]
        if xl > xr:
            raise ValueError("interval elements must be oriented left to right")
        h = xr - xl
        # Hats as linear polynomials in x and in u = 1 - x; exact zero constant
        # terms at the domain endpoints keep the singular integrals finite.
        in_x = [(xr / h, -1.0 / h), (-xl / h, 1.0 / h)]
        in_u = [((xr - 1.0) / h, 1.0 / h), ((1.0 - xl) / h, -1.0 / h)]
        for a in range(2):
            va = (v0, v1)[a]
            if mesh.boundary_vertex[va]:
                continue
            for b in range(2):
                vb = (v0, v1)[b]
                if mesh.boundary_vertex[vb]:
                    continue
                cx = _poly_mul(in_x[a], in_x[b])
                cu = _poly_mul(in_u[a], in_u[b])
                # Skip exact-zero coefficients: their power integrals may be
                # infinite on elements touching the domain endpoints.
                val = sum(cx[k] * _power_int(k - 2.0 * s, xl, xr)
                          for k in range(3) if cx[k] != 0.0)
                val += sum(cu[k] * _power_int(k - 2.0 * s, 1.0 - xr, 1.0 - xl)
                           for k in range(3) if cu[k] != 0.0)
                out[e, a, b] = val / (2.0 * s)
    return out


# ---------------------------------------------------------------------------
# 2d element cells


def _dyadic_bounds(levels):
    cuts = [1.0] + [2.0 ** (-l - 1) for l in range(levels)] + [0.0]
    return list(zip(cuts[1:], cuts[:-1]))  # (lo, hi) pairs, descending


def _strip_cells(e0, e1, apex, corner0, corner1, order, levels):
    """Cells covering the triangle (e0, e1, apex) graded towards the edge e0-e1.

    corner0/corner1 flag edge endpoints where the weight is additionally
    singular along the edge direction (polygon corners).
    """
    sq_pts, sq_w = square_rule(order)
    jac0 = abs((e1[0] - e0[0]) * (apex[1] - e0[1]) - (e1[1] - e0[1]) * (apex[0] - e0[0]))
    cells = []
    for lv, hv in _dyadic_bounds(levels):
        level = max(0, int(round(-np.log2(max(hv, 2.0 ** -levels)))))
        if corner0 or corner1:
            ucuts = [1.0] + [2.0 ** (-k - 1) for k in range(level)] + [0.0]
            spans = list(zip(ucuts[1:], ucuts[:-1]))
            if corner0 and corner1:
                urange = [(0.5 * lo, 0.5 * hi) for lo, hi in spans]
                urange += [(1.0 - 0.5 * hi, 1.0 - 0.5 * lo) for lo, hi in spans]
            elif corner0:
                urange = spans
            else:
                urange = [(1.0 - hi, 1.0 - lo) for lo, hi in spans]
        else:
            urange = [(0.0, 1.0)]
        for lu, hu in urange:
            u = lu + (hu - lu) * sq_pts[:, 0]
            v = lv + (hv - lv) * sq_pts[:, 1]
            base = e0[None, :] + u[:, None] * (e1 - e0)[None, :]
            x = (1.0 - v)[:, None] * base + v[:, None] * apex[None, :]
            w = sq_w * (hu - lu) * (hv - lv) * (1.0 - v) * jac0
            cells.append((x, w))
    return cells


def _plain_cell(tri, order):
    pts, wts = simplex_rule(2, order)
    b = np.stack([tri[1] - tri[0], tri[2] - tri[1]], axis=1)
    jac = abs(np.linalg.det(b))
    x = tri[0][None, :] + pts @ b.T
    return x, wts * jac


class _BoundaryGeometry:
    def __init__(self, mesh):
        poly = mesh.domain_polygon()
        self.corners = poly
        self.edge_a = poly
        self.edge_b = np.roll(poly, -1, axis=0)
        self.tol = 1e-12 * max(1.0, np.abs(poly).max())

    def on_boundary(self, p):
        return self.dist(p) <= self.tol

    def is_corner(self, p):
        return bool(np.any(np.linalg.norm(self.corners - p[None, :], axis=1) <= self.tol))

    def dist(self, p):
        seg = self.edge_b - self.edge_a
        rel = p[None, :] - self.edge_a
        t = np.clip(np.einsum("ki,ki->k", rel, seg) / np.einsum("ki,ki->k", seg, seg), 0.0, 1.0)
        foot = self.edge_a + t[:, None] * seg
        return float(np.min(np.linalg.norm(p[None, :] - foot, axis=1)))

    def edge_on_boundary(self, p, q):
        # Both endpoints on one polygon edge.
        seg = self.edge_b - self.edge_a
        rel_p = p[None, :] - self.edge_a
        rel_q = q[None, :] - self.edge_a
        cross_p = np.abs(rel_p[:, 0] * seg[:, 1] - rel_p[:, 1] * seg[:, 0])
        cross_q = np.abs(rel_q[:, 0] * seg[:, 1] - rel_q[:, 1] * seg[:, 0])
        norm = np.linalg.norm(seg, axis=1)
        hit = (cross_p <= self.tol * norm) & (cross_q <= self.tol * norm)
        if not np.any(hit):
            return False
        # Also require the points to lie within the edge span.
        for k in np.flatnonzero(hit):
            sp = np.dot(p - self.edge_a[k], seg[k]) / np.dot(seg[k], seg[k])
            sq = np.dot(q - self.edge_a[k], seg[k]) / np.dot(seg[k], seg[k])
            if -1e-12 <= min(sp, sq) and max(sp, sq) <= 1.0 + 1e-12:
                return True
        return False


def _triangle_cells(tri, geom, order, levels, depth=0):
    """Quadrature cells for one triangle, graded towards its boundary contact."""
    verts_on = [geom.on_boundary(tri[k]) for k in range(3)]
    edges_on = [geom.edge_on_boundary(tri[(k + 1) % 3], tri[(k + 2) % 3]) for k in range(3)]
    n_edges = sum(edges_on)

    if n_edges == 0 and not any(verts_on):
        diam = max(np.linalg.norm(tri[1] - tri[0]), np.linalg.norm(tri[2] - tri[1]),
                   np.linalg.norm(tri[0] - tri[2]))
        near = geom.dist(tri.mean(axis=0)) < 1.5 * diam
        return [_plain_cell(tri, order + 4 if near else order)]

    if n_edges >= 2:
        centroid = tri.mean(axis=0)
        cells = []
        for k in range(3):
            child = np.stack([centroid, tri[k], tri[(k + 1) % 3]])
            cells.extend(_triangle_cells(child, geom, order, levels, depth + 1))
        return cells

    if n_edges == 1:
        k = edges_on.index(True)
        e0, e1, apex = tri[(k + 1) % 3], tri[(k + 2) % 3], tri[k]
        if verts_on[k]:
            # Apex also touches the boundary: one red split separates the cases.
            return _red_split_cells(tri, geom, order, levels, depth)
        return _strip_cells(e0, e1, apex, geom.is_corner(e0), geom.is_corner(e1),
                            order, levels)

    # Vertex contact only: shrink dyadically towards the touching vertices.
    if depth >= levels:
        return [_plain_cell(tri, order)]
    return _red_split_cells(tri, geom, order, levels, depth)


def _red_split_cells(tri, geom, order, levels, depth):
    m01 = 0.5 * (tri[0] + tri[1])
    m12 = 0.5 * (tri[1] + tri[2])
    m02 = 0.5 * (tri[0] + tri[2])
    children = [
        np.stack([tri[0], m01, m02]),
        np.stack([m01, tri[1], m12]),
        np.stack([m02, m12, tri[2]]),
        np.stack([m01, m12, m02]),
    ]
    cells = []
    for child in children:
        cells.extend(_triangle_cells(child, geom, order, levels, depth + 1))
    return cells


def omega_element_tables_2d(mesh, s, order, levels=_LEVELS):
    """Local matrices of the weighted mass term, shape (ne, 3, 3).

    Uses graded cells near the boundary; rows and columns belonging to
    boundary vertices are zeroed.
    """
    geom = _BoundaryGeometry(mesh)
    coords = mesh.element_coords()
    counts = []
    all_pts = []
    all_wts = []
    for e in range(mesh.num_elements):
        cells = _triangle_cells(coords[e], geom, order, levels)
        pts = np.concatenate([c[0] for c in cells])
        wts = np.concatenate([c[1] for c in cells])
        counts.append(len(wts))
        all_pts.append(pts)
        all_wts.append(wts)
    counts = np.array(counts)
    pts = np.concatenate(all_pts)
    wts = np.concatenate(all_wts)
    omega = omega_2d(geom.corners, pts, s)

    out = np.zeros((mesh.num_elements, 3, 3))
    offsets = np.concatenate([[0], np.cumsum(counts)])
    interior = ~mesh.boundary_vertex[mesh.elements]
    for e in range(mesh.num_elements):
        sl = slice(offsets[e], offsets[e + 1])
        p, w = pts[sl], wts[sl] * omega[sl]
        b = np.stack([coords[e, 1] - coords[e, 0], coords[e, 2] - coords[e, 1]], axis=1)
        uv = np.linalg.solve(b, (p - coords[e, 0]).T).T
        phi = reference_basis(2, uv)
        mask = interior[e].astype(float)
        phi = phi * mask[:, None]
        out[e] = np.einsum("n,an,bn->ab", w, phi, phi)
    return out
