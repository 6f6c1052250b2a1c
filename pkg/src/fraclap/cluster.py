"""Geometric cluster tree over the dof index set and the admissible block partition.

Clusters are built by geometric bisection: a cluster's bounding box (the hull
of its dofs' support boxes) is split in half perpendicular to its longest
edge, dofs being assigned by the centers of their support boxes, until
clusters have at most `n_leaf` indices.  A pair of clusters is admissible when
max(diam) <= eta * dist of their boxes; the partition of I x I is found by
recursive descent from the root pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import support_boxes


@dataclass(frozen=True)
class BoundingBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=np.float64))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=np.float64))
        if np.any(self.lower > self.upper):
            raise ValueError("box lower corner exceeds upper corner")

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def distance(self, other):
        gap = np.maximum(other.lower - self.upper, 0.0) + np.maximum(self.lower - other.upper, 0.0)
        return float(np.linalg.norm(gap))


def is_admissible(b1, b2, eta):
    """Admissibility max(diam(b1), diam(b2)) <= eta * dist(b1, b2)."""
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    return max(b1.diameter, b2.diameter) <= eta * b1.distance(b2)


@dataclass
class ClusterNode:
    indices: np.ndarray          # dof indices of the cluster
    box: BoundingBox
    level: int
    begin: int                   # [begin, end) in the permuted ordering
    end: int
    children: tuple = ()         # () for leaves, else (left id, right id)

    @property
    def is_leaf(self):
        return not self.children

    @property
    def size(self):
        return self.end - self.begin


class ClusterTree:
    """Binary tree of clusters; nodes[0] is the root covering all dofs.

    `permutation[pos]` is the dof stored at position `pos` of the leaf order,
    so each cluster occupies the contiguous range [begin, end).
    """

    def __init__(self, nodes, permutation, leaf_size):
        self.nodes = nodes
        self.permutation = np.asarray(permutation, dtype=np.int64)
        self.leaf_size = int(leaf_size)

    @property
    def root(self):
        return self.nodes[0]

    @property
    def depth(self):
        return max(node.level for node in self.nodes)

    def leaves(self):
        return [n for n in self.nodes if n.is_leaf]


def build_cluster_tree(m, n_leaf):
    """Geometric-bisection cluster tree with leaf size `n_leaf`.

    Ties on the longest box edge are broken by the lowest axis; support-box
    centers exactly on the split plane go to the lower child; an empty child
    falls back to a median split on the same axis.
    """
    if n_leaf < 1:
        raise ValueError("n_leaf must be >= 1")
    lowers, uppers = support_boxes(m)
    centers = 0.5 * (lowers + uppers)

    nodes = []
    permutation = np.empty(m.num_dofs, dtype=np.int64)

    def build(indices, level, begin):
        box = BoundingBox(lowers[indices].min(axis=0), uppers[indices].max(axis=0))
        node_id = len(nodes)
        nodes.append(ClusterNode(indices, box, level, begin, begin + len(indices)))
        if len(indices) <= n_leaf:
            permutation[begin:begin + len(indices)] = indices
            return node_id
        extent = box.upper - box.lower
        axis = int(np.argmax(extent))  # argmax takes the lowest axis on ties
        mid = 0.5 * (box.lower[axis] + box.upper[axis])
        take = centers[indices, axis] <= mid
        if take.all() or not take.any():
            mid = float(np.median(centers[indices, axis]))
            take = centers[indices, axis] <= mid
            if take.all() or not take.any():
                take = np.zeros(len(indices), dtype=bool)
                take[: (len(indices) + 1) // 2] = True
        left = build(indices[take], level + 1, begin)
        right = build(indices[~take], level + 1, begin + int(take.sum()))
        nodes[node_id].children = (left, right)
        return node_id

    build(np.arange(m.num_dofs, dtype=np.int64), 0, 0)
    return ClusterTree(nodes, permutation, n_leaf)


@dataclass
class Block:
    tau: int                     # cluster node ids
    sigma: int
    admissible: bool


@dataclass
class BlockPartition:
    """Partition of I x I into admissible (far) and inadmissible (near) blocks."""

    tree: ClusterTree
    eta: float
    blocks: list = field(default_factory=list)

    @property
    def far(self):
        return [b for b in self.blocks if b.admissible]

    @property
    def near(self):
        return [b for b in self.blocks if not b.admissible]

    def block_ranges(self, block):
        tau = self.tree.nodes[block.tau]
        sigma = self.tree.nodes[block.sigma]
        return (tau.begin, tau.end), (sigma.begin, sigma.end)


def build_partition(t, eta):
    """Recursive descent from (root, root); see module docstring for the rules."""
    blocks = []
    nodes = t.nodes

    def descend(i, j):
        a, b = nodes[i], nodes[j]
        if is_admissible(a.box, b.box, eta):
            blocks.append(Block(i, j, True))
            return
        if a.is_leaf and b.is_leaf:
            blocks.append(Block(i, j, False))
            return
        split_a = not a.is_leaf
        split_b = not b.is_leaf
        if split_a and split_b:
            for ci in a.children:
                for cj in b.children:
                    descend(ci, cj)
        elif split_a:
            for ci in a.children:
                descend(ci, j)
        else:
            for cj in b.children:
                descend(i, cj)

    descend(0, 0)
    return BlockPartition(t, eta, blocks)


def sparsity_constant(p):
    """Max count of far-field partners over clusters, row- or column-wise."""
    row = {}
    col = {}
    for b in p.far:
        row[b.tau] = row.get(b.tau, 0) + 1
        col[b.sigma] = col.get(b.sigma, 0) + 1
    counts = list(row.values()) + list(col.values())
    return max(counts) if counts else 0


def partition_to_csv(p):
    """Debug dump: one line per block, 'tau_lo,tau_hi,sigma_lo,sigma_hi,admissible'.

    Ranges are [lo, hi) positions in the tree-induced permutation; the
    admissible flag is 0 or 1.
    """
    lines = []
    for b in p.blocks:
        (tl, th), (sl, sh) = p.block_ranges(b)
        lines.append(f"{tl},{th},{sl},{sh},{int(b.admissible)}")
    return "\n".join(lines) + "\n"


def partition_from_csv(text):
    """Parse the partition dump back into range tuples (no tree reconstruction)."""
    rows = []
    for line in text.strip().splitlines():
        tl, th, sl, sh, adm = line.split(",")
        rows.append(((int(tl), int(th)), (int(sl), int(sh)), bool(int(adm))))
    return rows
