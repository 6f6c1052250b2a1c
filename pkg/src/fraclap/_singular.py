"""Regularized quadrature for touching element pairs.

The kernel |x-y|^(-d-2s) is singular where the closures of two elements meet.
For each touching class (identical, shared facet, shared vertex) the pair
integral is rewritten in relative coordinates.  The hat-function differences
are exactly linear in those coordinates and the domain cross-section lengths
are exactly linear in the radial variable, so the radial integral has a closed
form and only a smooth low-dimensional integral over directions is left, which
tensor Gauss rules resolve at spectral accuracy.

All routines are vectorized over a batch of pair geometries and return the
local interaction matrices over the union of the pair's vertices.
"""

from __future__ import annotations

import numpy as np

from ._quad import gauss01, kernel_pow

# Hat differences (x-side minus y-side) as linear forms of the relative
# coordinates, for the vertex union in canonical order.
_EDGE_FORMS = np.array([
    [-1.0, 0.0, 0.0],   # shared vertex A
    [1.0, -1.0, 1.0],   # shared vertex B
    [0.0, 1.0, 0.0],    # apex P of the first element
    [0.0, 0.0, -1.0],   # apex Q of the second element
])

_VERTEX_FORMS = np.array([
    [-1.0, 0.0, 1.0, 0.0],   # shared vertex A
    [1.0, -1.0, 0.0, 0.0],   # P1
    [0.0, 1.0, 0.0, 0.0],    # P2
    [0.0, 0.0, -1.0, 1.0],   # Q1
    [0.0, 0.0, 0.0, -1.0],   # Q2
])

_REF_GRADS = np.array([[-1.0, 0.0], [1.0, -1.0], [0.0, 1.0]])


def _panel01(order, panels=2):
    """Composite Gauss rule on [0,1]: `panels` equal panels of `order` points."""
    t, w = gauss01(order)
    nodes = np.concatenate([(k + t) / panels for k in range(panels)])
    wts = np.tile(w / panels, panels)
    return nodes, wts


def identical_local_2d(bmats, s, order):
    """Pair integrals over K x K for a batch of triangles.

    `bmats` has shape (nc, 2, 2) with columns (v1-v0, v2-v1).  Returns local
    matrices of shape (nc, 3, 3).
    """
    eta, w = _panel01(order)
    # Direction chords spanning the three forward sectors of the difference body.
    chords = np.stack([
        np.stack([np.ones_like(eta), eta], axis=1),
        np.stack([eta, np.ones_like(eta)], axis=1),
        np.stack([-eta, 1.0 - eta], axis=1),
    ])  # (3, q, 2)
    dirs = chords.reshape(-1, 2)
    wts = np.tile(w, 3)

    lam = _REF_GRADS @ dirs.T                      # (3, nodes)
    phys = np.einsum("cij,nj->cni", bmats, dirs)   # (nc, nodes, 2)
    kern = kernel_pow(np.einsum("cni,cni->cn", phys, phys), s, 2)
    radial = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s) * (4.0 - 2.0 * s))
    jac2 = np.abs(np.linalg.det(bmats)) ** 2
    local = np.einsum("n,an,bn,cn->cab", wts, lam, lam, kern)
    return radial * jac2[:, None, None] * local


def identical_local_1d(h, s):
    """Pair integrals over K x K for 1d elements of lengths `h`, shape (nc, 2, 2)."""
    slopes = np.stack([-1.0 / h, 1.0 / h], axis=1)  # (nc, 2)
    base = 2.0 * h ** (3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s))
    return base[:, None, None] * slopes[:, :, None] * slopes[:, None, :]


def _edge_patches(order):
    """Integration patches for the shared-facet transform.

    Each patch yields direction triples r = (u-u', v, v') of unit "radius",
    the cross-section slope c with section length (1 - rho*c), and node
    weights.  The unit square is covered by a 2x2 composite rule, which keeps
    the direction-dependent kernel factor spectrally resolved at low orders.
    """
    t1, w1 = _panel01(order)
    e1, e2 = np.meshgrid(t1, t1, indexing="ij")
    ww1, ww2 = np.meshgrid(w1, w1, indexing="ij")
    e1, e2 = e1.ravel(), e2.ravel()
    sq_w = (ww1 * ww2).ravel()

    # Triangle halves of the unit square (split along e2 = 1 - e1), collapsed
    # from the square rule.
    lo_pts = np.stack([e1, (1.0 - e1) * e2], axis=1)
    lo_w = sq_w * (1.0 - e1)
    hi_pts = np.stack([e1, 1.0 - e1 * e2], axis=1)
    hi_w = sq_w * e1

    one = np.ones_like(e1)
    patches = [
        (np.stack([-one, e1, e2], axis=1), 1.0 + e1, sq_w),
        (np.stack([-e1, one, e2], axis=1), 1.0 + e1, sq_w),
        (np.stack([-lo_pts[:, 0], lo_pts[:, 1], one], axis=1), np.ones_like(lo_w), lo_w),
        (np.stack([-hi_pts[:, 0], hi_pts[:, 1], one], axis=1),
         hi_pts[:, 0] + hi_pts[:, 1], hi_w),
        (np.stack([one, e1, e2], axis=1), 1.0 + e2, sq_w),
        (np.stack([lo_pts[:, 0], one, lo_pts[:, 1]], axis=1), np.ones_like(lo_w), lo_w),
        (np.stack([hi_pts[:, 0], one, hi_pts[:, 1]], axis=1),
         hi_pts[:, 0] + hi_pts[:, 1], hi_w),
        (np.stack([e1, e2, one], axis=1), 1.0 + e1, sq_w),
    ]
    dirs = np.concatenate([p[0] for p in patches])
    cs = np.concatenate([p[1] for p in patches])
    wts = np.concatenate([p[2] for p in patches])
    return dirs, cs, wts


def edge_local_2d(emats, jacs, s, order):
    """Pair integrals for triangles sharing an edge.

    `emats` has shape (nc, 2, 3) with columns (B-A, P-B, -(Q-B)) for the pair
    (A, B, P) x (A, B, Q); `jacs` holds the product of the two element
    Jacobians.  Returns (nc, 4, 4) matrices over the vertex order (A, B, P, Q).
    """
    dirs, cs, wts = _edge_patches(order)
    lam = _EDGE_FORMS @ dirs.T                     # (4, nodes)
    phys = np.einsum("cij,nj->cni", emats, dirs)
    kern = kernel_pow(np.einsum("cni,cni->cn", phys, phys), s, 2)
    beta = 1.0 / ((3.0 - 2.0 * s) * (4.0 - 2.0 * s))
    weight = wts * cs ** (-(3.0 - 2.0 * s))
    local = np.einsum("n,an,bn,cn->cab", weight, lam, lam, kern)
    return beta * jacs[:, None, None] * local


def _vertex_nodes(order):
    t, w = _panel01(order)
    e1, e2, e3 = np.meshgrid(t, t, t, indexing="ij")
    w1, w2, w3 = np.meshgrid(w, w, w, indexing="ij")
    e1, e2, e3 = e1.ravel(), e2.ravel(), e3.ravel()
    wts = (w1 * w2 * w3).ravel() * e2  # e2 is the nested Duffy Jacobian
    one = np.ones_like(e1)
    r_first = np.stack([one, e1, e2, e2 * e3], axis=1)
    r_second = np.stack([e2, e2 * e3, one, e1], axis=1)
    return np.concatenate([r_first, r_second]), np.tile(wts, 2)


def vertex_local_2d(vmats, jacs, s, order):
    """Pair integrals for triangles sharing exactly one vertex.

    `vmats` has shape (nc, 2, 4) with columns (P1-A, P2-P1, -(Q1-A), -(Q2-Q1))
    for the pair (A, P1, P2) x (A, Q1, Q2).  Returns (nc, 5, 5) matrices over
    the vertex order (A, P1, P2, Q1, Q2).
    """
    dirs, wts = _vertex_nodes(order)
    lam = _VERTEX_FORMS @ dirs.T
    phys = np.einsum("cij,nj->cni", vmats, dirs)
    kern = kernel_pow(np.einsum("cni,cni->cn", phys, phys), s, 2)
    local = np.einsum("n,an,bn,cn->cab", wts, lam, lam, kern)
    return (jacs / (4.0 - 2.0 * s))[:, None, None] * local


def adjacent_local_1d(h_left, h_right, s, order):
    """Pair integrals for 1d elements sharing a vertex.

    Returns (nc, 3, 3) matrices over (left endpoint, shared vertex, right
    endpoint).  The radial direction is parametrized by c in [0,1] with a
    kink where the section leaves the shorter element, so the two smooth
    pieces are integrated separately.
    """
    t, w = gauss01(order)
    hl = np.asarray(h_left)[:, None]
    hr = np.asarray(h_right)[:, None]
    cstar = hl / (hl + hr)
    slopes_l = np.stack([-1.0 / h_left, 1.0 / h_left, np.zeros_like(h_left)], axis=1)
    slopes_r = np.stack([np.zeros_like(h_right), -1.0 / h_right, 1.0 / h_right], axis=1)

    total = np.zeros((len(h_left), 3, 3))
    # Two smooth pieces, each halved once: the section length T(c) has branch
    # points just outside either piece, and shorter panels keep Gauss spectral.
    panels = (
        (0.0, 0.5 * cstar, True),
        (0.5 * cstar, cstar, True),
        (cstar, 0.5 * (cstar + 1.0), False),
        (0.5 * (cstar + 1.0), 1.0, False),
    )
    for lo, hi, below_kink in panels:
        c = lo + (hi - lo) * t[None, :]
        seg_w = (hi - lo) * w[None, :]
        tmax = hr / (1.0 - c) if below_kink else hl / c
        lam = slopes_l[:, :, None] * c[:, None, :] + slopes_r[:, :, None] * (1.0 - c)[:, None, :]
        radial = tmax ** (3.0 - 2.0 * s) / (3.0 - 2.0 * s)
        total += np.einsum("cn,can,cbn->cab", seg_w * radial, lam, lam)
    return total
