"""Blockwise low-rank compression of a dense matrix over a block partition.

Admissible (far-field) blocks hold truncated-SVD factors of uniform target
rank; inadmissible (near-field) blocks are copied verbatim, so the
approximation error is due to the far field only.  Blocks address contiguous
index ranges of the cluster-tree permutation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import LowRankFactor, power_norm2, svd


@dataclass
class HMatrix:
    """Partition-aligned representation: dense near blocks, factored far blocks."""

    partition: object
    permutation: np.ndarray
    far_blocks: list        # aligned with partition.far, entries LowRankFactor
    near_blocks: list       # aligned with partition.near, entries ndarray
    rank: int

    @property
    def shape(self):
        n = len(self.permutation)
        return (n, n)

    def matvec(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (len(self.permutation),):
            raise ValueError(f"vector length {v.shape} does not match {self.shape}")
        vp = v[self.permutation]
        out = np.zeros_like(vp)
        for block, factor in zip(self.partition.far, self.far_blocks):
            (tl, th), (sl, sh) = self.partition.block_ranges(block)
            out[tl:th] += factor.x_factor @ (factor.y_factor.T @ vp[sl:sh])
        for block, dense in zip(self.partition.near, self.near_blocks):
            (tl, th), (sl, sh) = self.partition.block_ranges(block)
            out[tl:th] += dense @ vp[sl:sh]
        result = np.empty_like(out)
        result[self.permutation] = out
        return result

    def rmatvec(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (len(self.permutation),):
            raise ValueError(f"vector length {v.shape} does not match {self.shape}")
        vp = v[self.permutation]
        out = np.zeros_like(vp)
        for block, factor in zip(self.partition.far, self.far_blocks):
            (tl, th), (sl, sh) = self.partition.block_ranges(block)
            out[sl:sh] += factor.y_factor @ (factor.x_factor.T @ vp[tl:th])
        for block, dense in zip(self.partition.near, self.near_blocks):
            (tl, th), (sl, sh) = self.partition.block_ranges(block)
            out[sl:sh] += dense.T @ vp[tl:th]
        result = np.empty_like(out)
        result[self.permutation] = out
        return result

    def to_dense(self):
        n = len(self.permutation)
        out = np.zeros((n, n))
        for block, factor in zip(self.partition.far, self.far_blocks):
            (tl, th), (sl, sh) = self.partition.block_ranges(block)
            out[tl:th, sl:sh] = factor.matrix()
        for block, dense in zip(self.partition.near, self.near_blocks):
            (tl, th), (sl, sh) = self.partition.block_ranges(block)
            out[tl:th, sl:sh] = dense
        inv = np.argsort(self.permutation)
        return out[np.ix_(inv, inv)]


def hmatvec(h, v):
    return h.matvec(v)


class BlockSvdCache:
    """Per-far-block SVDs of a permuted dense matrix, reusable across ranks."""

    def __init__(self, mtx, partition, threads=1):
        n = len(partition.tree.permutation)
        if mtx.shape != (n, n):
            raise ValueError(f"matrix shape {mtx.shape} does not match partition size {n}")
        perm = partition.tree.permutation
        self.partition = partition
        self.permuted = np.ascontiguousarray(mtx[np.ix_(perm, perm)])
        ranges = [partition.block_ranges(b) for b in partition.far]

        def factor(rng):
            (tl, th), (sl, sh) = rng
            return svd(self.permuted[tl:th, sl:sh])

        if threads > 1 and len(ranges) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                self.factors = list(pool.map(factor, ranges))
        else:
            self.factors = [factor(rng) for rng in ranges]

    def singular_values(self):
        return [sigma for (_, sigma, _) in self.factors]

    def hmatrix(self, r):
        if r < 1:
            raise ValueError("rank must be >= 1")
        far = []
        for u, sigma, v in self.factors:
            k = min(r, len(sigma))
            far.append(LowRankFactor(u[:, :k] * sigma[:k], v[:, :k].copy()))
        near = []
        for block in self.partition.near:
            (tl, th), (sl, sh) = self.partition.block_ranges(block)
            near.append(self.permuted[tl:th, sl:sh].copy())
        return HMatrix(self.partition, self.partition.tree.permutation.copy(),
                       far, near, r)


def compress(mtx, p, r, threads=1):
    """Blockwise rank-r compression of a dense matrix over partition `p`."""
    return BlockSvdCache(mtx, p, threads=threads).hmatrix(r)


def block_singular_values(mtx, p):
    """Full singular value list of every admissible block, in partition order."""
    return BlockSvdCache(mtx, p).singular_values()


def approximation_error(dense, h, tol=1e-8, max_iter=500):
    """Spectral norm of (dense - h) estimated by power iteration.

    Returns a PowerNormResult; `.value` is the norm estimate and `.converged`
    the power-iteration flag.
    """
    dense = np.asarray(dense, dtype=np.float64)
    n = dense.shape[0]
    if dense.shape != h.shape:
        raise ValueError(f"shape mismatch {dense.shape} vs {h.shape}")

    def apply(x):
        return dense @ x - h.matvec(x)

    def apply_t(x):
        return dense.T @ x - h.rmatvec(x)

    return power_norm2(apply, apply_t, n, n, tol=tol, max_iter=max_iter)


def storage_bytes(h):
    """Exact byte count of the stored factors and dense blocks (8 bytes per real)."""
    total = 0
    for factor in h.far_blocks:
        total += factor.rank * (factor.x_factor.shape[0] + factor.y_factor.shape[0]) * 8
    for dense in h.near_blocks:
        total += dense.shape[0] * dense.shape[1] * 8
    return total
