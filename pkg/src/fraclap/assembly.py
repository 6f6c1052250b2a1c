"""Dense Galerkin stiffness matrix of the integral fractional Laplacian.

The bilinear form is assembled entry-wise from

    A_ij = C(d,s)/2 * [ II_{Omega x Omega} (psi_i(x)-psi_i(y))(psi_j(x)-psi_j(y))
                                           |x-y|^(-d-2s) dy dx
                        + 2 I_Omega psi_i psi_j w ]

where w is the exterior weight handled in `_complement`.  The double integral
is split over element pairs: touching pairs (identical, shared facet, shared
vertex) go through the regularizing transforms in `_singular`, disjoint pairs
use tensor Gauss rules whose order decays with the pair distance.  Pairs with
congruent relative geometry share one quadrature evaluation, which makes
assembly on structured meshes fast without changing any computed value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _complement, _singular
from ._quad import kernel_pow, reference_basis, simplex_rule
from .errors import AssemblyError

_PAIR_CHUNK = 400_000


def normalization_constant(d, s):
    """The constant C(d,s) = 2^(2s) s Gamma(s + d/2) / (pi^(d/2) Gamma(1-s))."""
    if d not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {d}")
    if not 0.0 < s < 1.0:
        raise ValueError(f"fractional order must lie in (0, 1), got {s}")
    return (2.0 ** (2.0 * s) * s * math.gamma(s + 0.5 * d)
            / (math.pi ** (0.5 * d) * math.gamma(1.0 - s)))


@dataclass(frozen=True)
class FracParams:
    """Problem parameters: dimension, fractional order, normalization constant."""

    d: int
    s: float
    c_ds: float = field(default=None)

    def __post_init__(self):
        if self.c_ds is None:
            object.__setattr__(self, "c_ds", normalization_constant(self.d, self.s))
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"fractional order must lie in (0, 1), got {self.s}")
        if self.c_ds <= 0.0:
            raise ValueError("normalization constant must be positive")


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature orders: `gauss_order` points per dimension for disjoint element
    pairs (graded down with distance), `singular_order` for the regularized
    touching-pair transforms, `complement_order` for the exterior-weight term."""

    gauss_order: int = 4
    singular_order: int = 6
    complement_order: int = 8

    def __post_init__(self):
        if min(self.gauss_order, self.singular_order, self.complement_order) < 1:
            raise ValueError("quadrature orders must be >= 1")


def complement_weight(m, x, s):
    """Exterior weight w(x) at a point strictly inside the domain."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if len(x) != m.dim:
        raise ValueError(f"point has {len(x)} coordinates, mesh is {m.dim}d")
    if m.dim == 1:
        if not 0.0 < x[0] < 1.0:
            raise ValueError(f"point {x[0]} is not strictly inside (0, 1)")
        return float(_complement.omega_1d(x, s)[0])
    poly = m.domain_polygon()
    geom = _complement._BoundaryGeometry(m)
    if geom.dist(x) <= geom.tol or not _point_in_polygon(poly, x):
        raise ValueError(f"point {x.tolist()} is not strictly inside the domain")
    return float(_complement.omega_2d(poly, x[None, :], s)[0])


def _point_in_polygon(poly, x):
    a = poly
    b = np.roll(poly, -1, axis=0)
    cond = (a[:, 1] <= x[1]) != (b[:, 1] <= x[1])
    slope = (b[:, 0] - a[:, 0]) * (x[1] - a[:, 1]) / np.where(
        b[:, 1] != a[:, 1], b[:, 1] - a[:, 1], 1.0)
    crossings = np.sum(cond & (x[0] < a[:, 0] + slope))
    return crossings % 2 == 1


def load_vector(m, f, q):
    """Right-hand side b_i = integral of f * psi_i, by per-element Gauss rules."""
    ref_pts, ref_w = simplex_rule(m.dim, q.gauss_order)
    phi = reference_basis(m.dim, ref_pts)
    coords = m.element_coords()
    emat = coords[:, 1:, :] - coords[:, :-1, :]
    jac = np.abs(np.linalg.det(emat))
    pts = coords[:, None, 0, :] + np.einsum("pk,eki->epi", ref_pts, emat)
    flat = pts.reshape(-1, m.dim)
    try:
        vals = np.asarray(f(flat), dtype=np.float64).reshape(len(flat))
    except Exception:
        vals = np.array([float(f(p)) for p in flat])
    if not np.all(np.isfinite(vals)):
        raise ValueError("load function returned a non-finite value")
    vals = vals.reshape(m.num_elements, -1)
    contrib = np.einsum("ep,p,e,ap->ea", vals, ref_w, jac, phi)
    b_vertex = np.bincount(m.elements.ravel(), weights=contrib.ravel(),
                           minlength=len(m.vertices))
    return b_vertex[m.vertex_of_dof]


def assemble_stiffness(m, p, q):
    """Assemble the dense N x N stiffness matrix.

    The result is exactly symmetric: every unordered interaction is computed
    once and written to both triangles.
    """
    if p.d != m.dim:
        raise ValueError(f"parameter dimension {p.d} does not match mesh dimension {m.dim}")
    if m.num_dofs < 1:
        raise ValueError("mesh has no interior degrees of freedom")

    nv = len(m.vertices)
    acc = np.zeros((nv, nv))

    _accumulate_identical(acc, m, p.s, q)
    pairs_by_class = _classify_pairs(m)
    if m.dim == 1:
        _accumulate_adjacent_1d(acc, m, p.s, q, pairs_by_class["facet"])
    else:
        _accumulate_edge_2d(acc, m, p.s, q, pairs_by_class["facet"])
        _accumulate_vertex_2d(acc, m, p.s, q, pairs_by_class["vertex"])
    _accumulate_disjoint(acc, m, p.s, q, *pairs_by_class["disjoint"])

    if m.dim == 1:
        omega_local = _complement.omega_element_tables_1d(m, p.s)
    else:
        omega_local = _complement.omega_element_tables_2d(m, p.s, q.complement_order)
    _check_finite(omega_local, "exterior-weight integral", m.elements)
    _scatter_sym(acc, m.elements, 2.0 * _sym(omega_local))

    acc = np.triu(acc) + np.triu(acc, 1).T
    dofs = m.vertex_of_dof
    a = 0.5 * p.c_ds * acc[np.ix_(dofs, dofs)]
    if not np.all(np.isfinite(a)):
        bad = np.argwhere(~np.isfinite(a))[0]
        raise AssemblyError(f"non-finite stiffness entry at dof pair {tuple(bad)}")
    return a


def _sym(local):
    return 0.5 * (local + np.swapaxes(local, -1, -2))


def _check_finite(arr, stage, pair_ids):
    if np.all(np.isfinite(arr)):
        return
    bad = np.argwhere(~np.isfinite(arr.reshape(arr.shape[0], -1)))[0, 0]
    raise AssemblyError(f"{stage} produced a non-finite value for element pair "
                        f"{np.asarray(pair_ids)[bad]}")


def _scatter_sym(acc, vertex_ids, local):
    """Accumulate symmetric local matrices into the upper-canonical slots.

    `acc` holds one accumulator per unordered vertex pair (at row <= col);
    the mirror image is restored once at the end of assembly, which keeps the
    result symmetric to the last bit.
    """
    nv = acc.shape[0]
    rows = vertex_ids[:, :, None] + np.zeros_like(vertex_ids[:, None, :])
    cols = vertex_ids[:, None, :] + np.zeros_like(vertex_ids[:, :, None])
    idx = (np.minimum(rows, cols) * nv + np.maximum(rows, cols)).ravel()
    w = np.where(rows <= cols, local, 0.0).ravel()
    acc += np.bincount(idx, weights=w, minlength=nv * nv).reshape(nv, nv)


def _scatter_cross(acc, rows_ids, cols_ids, cross):
    """Accumulate -cross for pairs of disjoint vertex tuples (canonical slots)."""
    nv = acc.shape[0]
    rows = rows_ids[:, :, None] + np.zeros_like(cols_ids[:, None, :])
    cols = cols_ids[:, None, :] + np.zeros_like(rows_ids[:, :, None])
    idx = (np.minimum(rows, cols) * nv + np.maximum(rows, cols)).ravel()
    acc += np.bincount(idx, weights=-cross.ravel(), minlength=nv * nv).reshape(nv, nv)


def _classify_pairs(m):
    """Split unordered element pairs by the number of shared vertices."""
    ne = m.num_elements
    ii, jj = np.triu_indices(ne, k=1)
    ev = m.elements
    nloc = m.dim + 1
    shared = np.zeros(len(ii), dtype=np.int8)
    for a in range(nloc):
        for b in range(nloc):
            shared += ev[ii, a] == ev[jj, b]
    if m.dim == 1:
        return {
            "facet": (ii[shared == 1], jj[shared == 1]),
            "disjoint": (ii[shared == 0], jj[shared == 0]),
        }
    return {
        "facet": (ii[shared == 2], jj[shared == 2]),
        "vertex": (ii[shared == 1], jj[shared == 1]),
        "disjoint": (ii[shared == 0], jj[shared == 0]),
    }



def _congruence_classes(geoms, qscale):
    """Indices of one representative per congruence class, plus the inverse map."""
    flat = np.ascontiguousarray(np.round(geoms.reshape(len(geoms), -1) * qscale)
                                .astype(np.int64))
    voids = flat.view([("", np.int64)] * flat.shape[1]).ravel()
    _, first, inv = np.unique(voids, return_index=True, return_inverse=True)
    return first, inv


def _accumulate_identical(acc, m, s, q):
    coords = m.element_coords()
    if m.dim == 1:
        h = np.abs(coords[:, 1, 0] - coords[:, 0, 0])
        local = _singular.identical_local_1d(h, s)
    else:
        bmats = np.stack([coords[:, 1] - coords[:, 0], coords[:, 2] - coords[:, 1]], axis=2)
        first, inv = _congruence_classes(bmats, 2.0 ** 22 / m.h)
        local = _singular.identical_local_2d(bmats[first], s, q.singular_order)[inv]
    _check_finite(local, "identical-pair quadrature", np.arange(m.num_elements))
    _scatter_sym(acc, m.elements, _sym(local))


def _accumulate_adjacent_1d(acc, m, s, q, pair_ids):
    ii, jj = pair_ids
    if len(ii) == 0:
        return
    coords = m.element_coords()[:, :, 0]
    union = np.empty((len(ii), 3), dtype=np.int64)
    h_left = np.empty(len(ii))
    h_right = np.empty(len(ii))
    for k, (a, b) in enumerate(zip(ii, jj)):
        if coords[a].min() > coords[b].min():
            a, b = b, a
        shared = np.intersect1d(m.elements[a], m.elements[b])[0]
        left_far = m.elements[a][m.elements[a] != shared][0]
        right_far = m.elements[b][m.elements[b] != shared][0]
        union[k] = (left_far, shared, right_far)
        h_left[k] = coords[a].max() - coords[a].min()
        h_right[k] = coords[b].max() - coords[b].min()
    local = _singular.adjacent_local_1d(h_left, h_right, s, q.singular_order)
    _check_finite(local, "facet-pair quadrature", np.stack([ii, jj], axis=1))
    _scatter_sym(acc, union, 2.0 * _sym(local))


def _accumulate_edge_2d(acc, m, s, q, pair_ids):
    ii, jj = pair_ids
    if len(ii) == 0:
        return
    verts = m.vertices
    union = np.empty((len(ii), 4), dtype=np.int64)
    emats = np.empty((len(ii), 2, 3))
    jacs = np.empty(len(ii))
    areas2 = 2.0 * m.element_measures()
    for k, (ei, ej) in enumerate(zip(ii, jj)):
        vi, vj = m.elements[ei], m.elements[ej]
        shared = np.intersect1d(vi, vj)
        a_id, b_id = sorted(shared, key=lambda v: (verts[v, 0], verts[v, 1]))
        p_id = vi[~np.isin(vi, shared)][0]
        q_id = vj[~np.isin(vj, shared)][0]
        union[k] = (a_id, b_id, p_id, q_id)
        a_pt, b_pt = verts[a_id], verts[b_id]
        emats[k] = np.stack([b_pt - a_pt, verts[p_id] - b_pt, -(verts[q_id] - b_pt)], axis=1)
        jacs[k] = areas2[ei] * areas2[ej]
    first, inv = _congruence_classes(emats, 2.0 ** 22 / m.h)
    local = _singular.edge_local_2d(emats[first], jacs[first], s, q.singular_order)[inv]
    _check_finite(local, "facet-pair quadrature", np.stack([ii, jj], axis=1))
    _scatter_sym(acc, union, 2.0 * _sym(local))


def _accumulate_vertex_2d(acc, m, s, q, pair_ids):
    ii, jj = pair_ids
    if len(ii) == 0:
        return
    verts = m.vertices
    union = np.empty((len(ii), 5), dtype=np.int64)
    vmats = np.empty((len(ii), 2, 4))
    jacs = np.empty(len(ii))
    areas2 = 2.0 * m.element_measures()
    for k, (ei, ej) in enumerate(zip(ii, jj)):
        vi, vj = m.elements[ei], m.elements[ej]
        shared = np.intersect1d(vi, vj)[0]
        p1, p2 = vi[vi != shared]
        q1, q2 = vj[vj != shared]
        union[k] = (shared, p1, p2, q1, q2)
        a_pt = verts[shared]
        vmats[k] = np.stack([
            verts[p1] - a_pt,
            verts[p2] - verts[p1],
            -(verts[q1] - a_pt),
            -(verts[q2] - verts[q1]),
        ], axis=1)
        jacs[k] = areas2[ei] * areas2[ej]
    first, inv = _congruence_classes(vmats, 2.0 ** 22 / m.h)
    local = _singular.vertex_local_2d(vmats[first], jacs[first], s, q.singular_order)[inv]
    _check_finite(local, "vertex-pair quadrature", np.stack([ii, jj], axis=1))
    _scatter_sym(acc, union, 2.0 * _sym(local))


def _accumulate_disjoint(acc, m, s, q, ii, jj):
    if len(ii) == 0:
        return
    coords = m.element_coords()
    centroids = coords.mean(axis=1)
    radius = np.max(np.linalg.norm(coords - centroids[:, None, :], axis=2), axis=1)
    diam = m.element_diameters()

    gap = np.linalg.norm(centroids[ii] - centroids[jj], axis=1) - radius[ii] - radius[jj]
    ratio = np.maximum(gap, 0.0) / np.maximum(diam[ii], diam[jj])
    orders = np.full(len(ii), q.gauss_order, dtype=np.int64)
    orders[ratio < 6.0] = q.gauss_order + 2
    orders[ratio < 2.0] = q.gauss_order + 4

    emat = coords[:, 1:, :] - coords[:, :-1, :]
    jac = np.abs(np.linalg.det(emat)) if m.dim == 2 else np.abs(emat[:, 0, 0])

    for order in np.unique(orders):
        sel = orders == order
        _disjoint_bucket(acc, m, s, int(order), ii[sel], jj[sel], coords, emat, jac)


def _disjoint_bucket(acc, m, s, order, ii, jj, coords, emat, jac):
    d = m.dim
    nloc = d + 1
    ref_pts, ref_w = simplex_rule(d, order)
    nq = len(ref_w)
    phi = reference_basis(d, ref_pts)
    xx_weight = np.zeros((m.num_elements, nq))

    # Quantized relative geometry; congruent pairs share one quadrature table.
    qscale = 2.0 ** 22 / m.h

    for lo in range(0, len(ii), _PAIR_CHUNK):
        ci = ii[lo:lo + _PAIR_CHUNK]
        cj = jj[lo:lo + _PAIR_CHUNK]
        rel = np.concatenate([
            (coords[ci] - coords[ci][:, :1, :]).reshape(len(ci), -1),
            (coords[cj] - coords[ci][:, :1, :]).reshape(len(ci), -1),
        ], axis=1)
        keys = np.round(rel * qscale).astype(np.int64)
        keys = np.ascontiguousarray(keys)
        voids = keys.view([("", np.int64)] * keys.shape[1]).ravel()
        _, first, inv = np.unique(voids, return_index=True, return_inverse=True)

        rep_i, rep_j = ci[first], cj[first]
        rs, cs, cross = _pair_tables(coords, emat, rep_i, rep_j, ref_pts, ref_w, phi, s, d)
        _check_finite(cross, "disjoint-pair quadrature", np.stack([rep_i, rep_j], axis=1))

        np.add.at(xx_weight, ci, rs[inv])
        np.add.at(xx_weight, cj, cs[inv])
        _scatter_cross(acc, m.elements[ci], m.elements[cj], 2.0 * cross[inv])

    local_xx = np.einsum("ap,bp,p,e,ep->eab", phi, phi, ref_w, jac, xx_weight)
    _scatter_sym(acc, m.elements, 2.0 * _sym(local_xx))


def _pair_tables(coords, emat, rep_i, rep_j, ref_pts, ref_w, phi, s, d, chunk=1500):
    """Kernel row sums, column sums, and cross matrices per representative pair."""
    nc = len(rep_i)
    nq = len(ref_w)
    nloc = phi.shape[0]
    rs = np.empty((nc, nq))
    cs = np.empty((nc, nq))
    cross = np.empty((nc, nloc, nloc))
    for lo in range(0, nc, chunk):
        sl = slice(lo, min(lo + chunk, nc))
        pi, pj = rep_i[sl], rep_j[sl]
        pts_a = coords[pi, None, 0, :] + np.einsum("pk,cki->cpi", ref_pts, emat[pi])
        pts_b = coords[pj, None, 0, :] + np.einsum("pk,cki->cpi", ref_pts, emat[pj])
        diff = pts_a[:, :, None, :] - pts_b[:, None, :, :]
        kern = kernel_pow(np.einsum("cpqi,cpqi->cpq", diff, diff), s, d)
        ja = np.abs(np.linalg.det(emat[pi])) if d == 2 else np.abs(emat[pi, 0, 0])
        jb = np.abs(np.linalg.det(emat[pj])) if d == 2 else np.abs(emat[pj, 0, 0])
        wa = ref_w[None, :] * ja[:, None]
        wb = ref_w[None, :] * jb[:, None]
        rs[sl] = np.einsum("cpq,cq->cp", kern, wb)
        cs[sl] = np.einsum("cpq,cp->cq", kern, wa)
        cross[sl] = np.einsum("ap,cp,cpq,cq,bq->cab", phi, wa, kern, wb, phi, optimize=True)
    return rs, cs, cross
