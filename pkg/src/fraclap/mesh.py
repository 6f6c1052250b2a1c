"""Quasi-uniform simplicial meshes of the interval, the unit square, and the L-shape.

A mesh carries the geometry (vertices, elements), the boundary flags, and the
degree-of-freedom numbering of its interior vertices.  All generated meshes are
conforming and shape regular; `refine` performs uniform red refinement.
"""

from __future__ import annotations

import numpy as np


class Mesh:
    """Simplicial triangulation of a domain in R^d, d in {1, 2}.

    Attributes
    ----------
    dim : int
        Spatial dimension.
    vertices : ndarray, shape (num_vertices, dim)
        Vertex coordinates.
    elements : ndarray, shape (num_elements, dim + 1)
        Vertex indices of each simplex.
    boundary_vertex : ndarray of bool, shape (num_vertices,)
        True for vertices on the domain boundary.
    dof_of_vertex : ndarray of int, shape (num_vertices,)
        Index into {0, ..., N-1} for interior vertices, -1 for boundary ones.
    vertex_of_dof : ndarray of int, shape (N,)
        Inverse of `dof_of_vertex` restricted to interior vertices.
    h : float
        Mesh width, the maximum element diameter.
    """

    def __init__(self, dim, vertices, elements, boundary_vertex=None):
        self.dim = int(dim)
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64).reshape(-1, self.dim)
        self.elements = np.ascontiguousarray(elements, dtype=np.int64).reshape(-1, self.dim + 1)
        if boundary_vertex is None:
            boundary_vertex = _boundary_vertices_from_facets(self.elements, len(self.vertices))
        self.boundary_vertex = np.asarray(boundary_vertex, dtype=bool)

        self.dof_of_vertex = np.full(len(self.vertices), -1, dtype=np.int64)
        interior = np.flatnonzero(~self.boundary_vertex)
        self.dof_of_vertex[interior] = np.arange(len(interior))
        self.vertex_of_dof = interior

        self._validate()
        self.h = float(np.max(self.element_diameters()))

    @property
    def num_dofs(self):
        return len(self.vertex_of_dof)

    @property
    def num_elements(self):
        return len(self.elements)

    def element_coords(self):
        """Coordinates of all element corners, shape (num_elements, dim+1, dim)."""
        return self.vertices[self.elements]

    def element_measures(self):
        coords = self.element_coords()
        if self.dim == 1:
            return np.abs(coords[:, 1, 0] - coords[:, 0, 0])
        edge1 = coords[:, 1] - coords[:, 0]
        edge2 = coords[:, 2] - coords[:, 0]
        return 0.5 * np.abs(edge1[:, 0] * edge2[:, 1] - edge1[:, 1] * edge2[:, 0])

    def element_diameters(self):
        coords = self.element_coords()
        if self.dim == 1:
            return np.abs(coords[:, 1, 0] - coords[:, 0, 0])
        a = np.linalg.norm(coords[:, 1] - coords[:, 0], axis=1)
        b = np.linalg.norm(coords[:, 2] - coords[:, 1], axis=1)
        c = np.linalg.norm(coords[:, 0] - coords[:, 2], axis=1)
        return np.max(np.stack([a, b, c]), axis=0)

    def shape_regularity(self):
        """Max ratio of element diameter to inscribed-ball diameter."""
        if self.dim == 1:
            return 1.0
        coords = self.element_coords()
        a = np.linalg.norm(coords[:, 1] - coords[:, 0], axis=1)
        b = np.linalg.norm(coords[:, 2] - coords[:, 1], axis=1)
        c = np.linalg.norm(coords[:, 0] - coords[:, 2], axis=1)
        area = self.element_measures()
        inradius = 2.0 * area / (a + b + c)
        return float(np.max(self.element_diameters() / (2.0 * inradius)))

    def vertex_to_elements(self):
        """List of element-index arrays, one per vertex."""
        order = np.argsort(self.elements.ravel(), kind="stable")
        flat = self.elements.ravel()[order]
        elem_ids = np.repeat(np.arange(self.num_elements), self.dim + 1)[order]
        starts = np.searchsorted(flat, np.arange(len(self.vertices)))
        ends = np.searchsorted(flat, np.arange(len(self.vertices)), side="right")
        return [elem_ids[s:e] for s, e in zip(starts, ends)]

    def boundary_facets(self):
        """Facets contained in exactly one element, as sorted vertex tuples."""
        return _facets_on_boundary(self.elements)

    def domain_polygon(self):
        """Corner vertices of the polygonal domain boundary, counter-clockwise.

        Collinear chains of boundary edges are merged, so the polygon has one
        vertex per geometric corner (4 for the square, 6 for the L-shape).
        For d=1 returns the two endpoints.
        """
        if self.dim == 1:
            ends = self.vertices[[v for v, in self.boundary_facets()], 0]
            return np.sort(ends)
        return _trace_polygon(self.vertices, self.boundary_facets())

    def _validate(self):
        if self.dim not in (1, 2):
            raise ValueError(f"unsupported dimension {self.dim}")
        if self.elements.min(initial=0) < 0 or self.elements.max(initial=-1) >= len(self.vertices):
            raise ValueError("element refers to a vertex outside the mesh")
        if np.any(self.element_measures() <= 0.0):
            raise ValueError("mesh contains a degenerate element")

    def __repr__(self):
        return (f"Mesh(dim={self.dim}, vertices={len(self.vertices)}, "
                f"elements={self.num_elements}, dofs={self.num_dofs}, h={self.h:.4g})")


def _boundary_vertices_from_facets(elements, num_vertices):
    flags = np.zeros(num_vertices, dtype=bool)
    for facet in _facets_on_boundary(elements):
        flags[list(facet)] = True
    return flags


def _facets_on_boundary(elements):
    counts = {}
    nverts = elements.shape[1]
    for elem in elements:
        for k in range(nverts):
            facet = tuple(sorted(np.delete(elem, k)))
            counts[facet] = counts.get(facet, 0) + 1
    return [facet for facet, c in counts.items() if c == 1]


def _trace_polygon(vertices, boundary_facets):
    # Chain boundary edges into a closed loop, then drop collinear interior points.
    adj = {}
    for a, b in boundary_facets:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    start = min(adj)
    loop = [start]
    prev, cur = None, start
    while True:
        nxt = [v for v in adj[cur] if v != prev]
        nxt = nxt[0]
        if nxt == start:
            break
        loop.append(nxt)
        prev, cur = cur, nxt
    pts = vertices[loop]
    corners = []
    n = len(pts)
    for k in range(n):
        a, b, c = pts[(k - 1) % n], pts[k], pts[(k + 1) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if abs(cross) > 1e-12:
            corners.append(pts[k])
    poly = np.array(corners)
    # Orient counter-clockwise (positive signed area).
    area2 = np.sum(poly[:, 0] * np.roll(poly[:, 1], -1) - np.roll(poly[:, 0], -1) * poly[:, 1])
    if area2 < 0:
        poly = poly[::-1]
    return poly


def interval_mesh(n):
    """Uniform mesh of (0, 1) with `n` elements and n-1 interior dofs."""
    if n < 2:
        raise ValueError("interval_mesh needs n >= 2")
    vertices = np.linspace(0.0, 1.0, n + 1).reshape(-1, 1)
    elements = np.stack([np.arange(n), np.arange(1, n + 1)], axis=1)
    return Mesh(1, vertices, elements)


def unit_square_mesh(n):
    """Uniform triangulation of (0, 1)^2 with 2 n^2 elements.

    Each grid square is split along its lower-left to upper-right diagonal,
    which makes the mesh deterministic across platforms.
    """
    if n < 1:
        raise ValueError("unit_square_mesh needs n >= 1")
    return _grid_triangulation(n, lambda i, j: True, 1.0 / n)


def lshape_mesh(n):
    """Uniform triangulation of the L-shape (0,1)^2 minus [1/2,1)x[1/2,1).

    Three of the four quadrant squares are kept, each meshed with n x n grid
    cells, giving 6 n^2 elements with conforming interfaces.
    """
    if n < 1:
        raise ValueError("lshape_mesh needs n >= 1")
    return _grid_triangulation(2 * n, lambda i, j: not (i >= n and j >= n), 1.0 / (2 * n))


def _grid_triangulation(cells, keep, step):
    index = -np.ones((cells + 1, cells + 1), dtype=np.int64)
    coords = []
    for j in range(cells + 1):
        for i in range(cells + 1):
            touches = any(
                keep(ci, cj)
                for ci in (i - 1, i)
                for cj in (j - 1, j)
                if 0 <= ci < cells and 0 <= cj < cells
            )
            if touches:
                index[i, j] = len(coords)
                coords.append((i * step, j * step))
    elements = []
    for j in range(cells):
        for i in range(cells):
            if not keep(i, j):
                continue
            v00, v10 = index[i, j], index[i + 1, j]
            v01, v11 = index[i, j + 1], index[i + 1, j + 1]
            elements.append((v00, v10, v11))
            elements.append((v00, v11, v01))
    return Mesh(2, np.array(coords), np.array(elements))


def refine(m):
    """Uniform red refinement: each simplex is split into 2^d similar children."""
    if m.dim == 1:
        mids = 0.5 * (m.vertices[m.elements[:, 0]] + m.vertices[m.elements[:, 1]])
        nv = len(m.vertices)
        vertices = np.vstack([m.vertices, mids])
        mid_ids = nv + np.arange(m.num_elements)
        elements = np.vstack([
            np.stack([m.elements[:, 0], mid_ids], axis=1),
            np.stack([mid_ids, m.elements[:, 1]], axis=1),
        ])
        return Mesh(1, vertices, elements)

    edge_mid = {}
    vertices = [tuple(v) for v in m.vertices]

    def midpoint(a, b):
        key = (min(a, b), max(a, b))
        if key not in edge_mid:
            edge_mid[key] = len(vertices)
            vertices.append(tuple(0.5 * (m.vertices[a] + m.vertices[b])))
        return edge_mid[key]

    elements = []
    for v0, v1, v2 in m.elements:
        m01 = midpoint(v0, v1)
        m12 = midpoint(v1, v2)
        m02 = midpoint(v0, v2)
        elements.extend([(v0, m01, m02), (m01, v1, m12), (m02, m12, v2), (m01, m12, m02)])
    return Mesh(2, np.array(vertices), np.array(elements))


def support_box(m, j):
    """Axis-aligned bounding box of the support of the hat function of dof `j`.

    Returns (lower, upper) as float arrays of length `m.dim`.
    """
    if j < 0 or j >= m.num_dofs:
        raise ValueError(f"unknown dof index {j}")
    vertex = m.vertex_of_dof[j]
    incident = np.any(m.elements == vertex, axis=1)
    pts = m.vertices[m.elements[incident].ravel()]
    return pts.min(axis=0), pts.max(axis=0)


def support_boxes(m):
    """Support boxes of all dofs, as arrays (lower, upper) of shape (N, dim)."""
    lowers = np.empty((m.num_dofs, m.dim))
    uppers = np.empty((m.num_dofs, m.dim))
    v2e = m.vertex_to_elements()
    for j, vertex in enumerate(m.vertex_of_dof):
        pts = m.vertices[m.elements[v2e[vertex]].ravel()]
        lowers[j] = pts.min(axis=0)
        uppers[j] = pts.max(axis=0)
    return lowers, uppers
