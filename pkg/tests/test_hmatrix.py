import numpy as np
import pytest

from fraclap.assembly import FracParams, QuadratureSpec, assemble_stiffness
from fraclap.cluster import build_cluster_tree, build_partition
from fraclap.hmatrix import (
    approximation_error,
    block_singular_values,
    compress,
    hmatvec,
    storage_bytes,
)
from fraclap.linalg import lu_invert
from fraclap.mesh import interval_mesh, unit_square_mesh


@pytest.fixture(scope="module")
def inverse_system():
    """Small 2d problem with a nonempty far field: N=289."""
    m = unit_square_mesh(18)
    a = assemble_stiffness(m, FracParams(2, 0.5), QuadratureSpec())
    inv, _ = lu_invert(a)
    tree = build_cluster_tree(m, 20)
    part = build_partition(tree, 2.0)
    assert len(part.far) > 0
    return inv, part


@pytest.fixture(scope="module")
def tiny_system():
    """Partition with an empty far field (single near block)."""
    m = interval_mesh(8)
    a = assemble_stiffness(m, FracParams(1, 0.5), QuadratureSpec())
    inv, _ = lu_invert(a)
    part = build_partition(build_cluster_tree(m, 20), 2.0)
    return inv, part


class TestCompress:
    def test_full_rank_is_exact(self, inverse_system):
        inv, part = inverse_system
        n = inv.shape[0]
        h = compress(inv, part, n)
        err = approximation_error(inv, h)
        assert err.value <= 1e-10 * np.linalg.norm(inv, 2)

    def test_empty_far_field_is_exact_copy(self, tiny_system):
        inv, part = tiny_system
        h = compress(inv, part, 1)
        assert len(h.far_blocks) == 0
        assert np.array_equal(h.to_dense(), inv)

    def test_near_field_blocks_exact(self, inverse_system):
        inv, part = inverse_system
        h = compress(inv, part, 2)
        perm = part.tree.permutation
        permuted = inv[np.ix_(perm, perm)]
        for block, dense in zip(part.near, h.near_blocks):
            (tl, th), (sl, sh) = part.block_ranges(block)
            assert np.array_equal(dense, permuted[tl:th, sl:sh])

    def test_far_rank_bounded(self, inverse_system):
        inv, part = inverse_system
        h = compress(inv, part, 3)
        for factor in h.far_blocks:
            assert factor.rank <= 3

    def test_dimension_mismatch(self, inverse_system):
        _, part = inverse_system
        with pytest.raises(ValueError):
            compress(np.eye(5), part, 1)


class TestMatvec:
    def test_zero_vector(self, inverse_system):
        inv, part = inverse_system
        h = compress(inv, part, 2)
        assert np.all(hmatvec(h, np.zeros(inv.shape[0])) == 0.0)

    def test_full_rank_matches_dense(self, inverse_system):
        inv, part = inverse_system
        n = inv.shape[0]
        h = compress(inv, part, n)
        rng = np.random.default_rng(19)
        for _ in range(20):
            v = rng.standard_normal(n)
            ref = inv @ v
            assert np.linalg.norm(hmatvec(h, v) - ref) <= 1e-10 * np.linalg.norm(ref)

    def test_linearity(self, inverse_system):
        inv, part = inverse_system
        h = compress(inv, part, 4)
        rng = np.random.default_rng(7)
        u = rng.standard_normal(inv.shape[0])
        v = rng.standard_normal(inv.shape[0])
        lhs = hmatvec(h, 2.5 * u - 1.25 * v)
        rhs = 2.5 * hmatvec(h, u) - 1.25 * hmatvec(h, v)
        scale = max(np.linalg.norm(lhs), 1.0)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * scale

    def test_rmatvec_is_transpose(self, inverse_system):
        inv, part = inverse_system
        h = compress(inv, part, 3)
        rng = np.random.default_rng(4)
        x = rng.standard_normal(inv.shape[0])
        y = rng.standard_normal(inv.shape[0])
        # <Hx, y> == <x, H^T y>
        assert np.dot(h.matvec(x), y) == pytest.approx(np.dot(x, h.rmatvec(y)), rel=1e-12)

    def test_matvec_reproduces_near_columns(self, tiny_system):
        inv, part = tiny_system
        h = compress(inv, part, 1)
        for j in range(inv.shape[0]):
            e = np.zeros(inv.shape[0])
            e[j] = 1.0
            assert np.allclose(hmatvec(h, e), inv[:, j], rtol=0, atol=1e-15)

    def test_length_mismatch(self, inverse_system):
        inv, part = inverse_system
        h = compress(inv, part, 1)
        with pytest.raises(ValueError):
            hmatvec(h, np.ones(3))


class TestApproximationError:
    def test_exact_compression_error_zero(self, inverse_system):
        inv, part = inverse_system
        h = compress(inv, part, inv.shape[0])
        err = approximation_error(inv, h)
        assert err.value <= 1e-10 * np.linalg.norm(inv, 2)

    def test_matches_dense_sigma_max(self, inverse_system):
        inv, part = inverse_system
        for r in (1, 3):
            h = compress(inv, part, r)
            ref = np.linalg.norm(inv - h.to_dense(), 2)
            est = approximation_error(inv, h, tol=1e-11, max_iter=8000)
            assert est.value == pytest.approx(ref, rel=1e-6)

    def test_small_gap_estimate_stays_close(self, inverse_system):
        # successive-difference stopping is a Cauchy test: with a near-unit
        # spectral gap the estimate can lag the true norm, but only mildly
        inv, part = inverse_system
        h = compress(inv, part, 6)
        ref = np.linalg.norm(inv - h.to_dense(), 2)
        est = approximation_error(inv, h)
        assert est.value == pytest.approx(ref, rel=1e-3)
        assert est.value <= ref * (1.0 + 1e-10)

    def test_single_far_block_eckart_young(self):
        # two separated singleton clusters: error of rank-1 compression of the
        # only far 2x2 block is its second singular value
        from fraclap.cluster import BlockPartition, Block, BoundingBox, ClusterNode, ClusterTree

        nodes = [
            ClusterNode(np.array([0, 1, 2, 3]), BoundingBox([0.0], [3.0]), 0, 0, 4),
            ClusterNode(np.array([0, 1]), BoundingBox([0.0], [0.1]), 1, 0, 2),
            ClusterNode(np.array([2, 3]), BoundingBox([2.9], [3.0]), 1, 2, 4),
        ]
        nodes[0].children = (1, 2)
        tree = ClusterTree(nodes, np.array([0, 1, 2, 3]), 2)
        part = BlockPartition(tree, 2.0, [
            Block(1, 1, False), Block(2, 2, False),
            Block(1, 2, True), Block(2, 1, True),
        ])
        mtx = np.zeros((4, 4))
        mtx[0:2, 2:4] = np.diag([2.0, 1.0])
        h = compress(mtx, part, 1)
        err = approximation_error(mtx, h)
        assert err.value == pytest.approx(1.0, rel=1e-8)

    def test_error_monotone_in_rank(self, inverse_system):
        inv, part = inverse_system
        errs = [approximation_error(inv, compress(inv, part, r)).value
                for r in (1, 2, 4, 8, 12)]
        for e1, e2 in zip(errs, errs[1:]):
            assert e2 <= e1 * (1.0 + 1e-8)


class TestStorage:
    def test_dense_single_block(self, tiny_system):
        inv, part = tiny_system
        h = compress(inv, part, 1)
        assert storage_bytes(h) == 8 * inv.shape[0] ** 2

    def test_low_rank_formula(self, inverse_system):
        inv, part = inverse_system
        h = compress(inv, part, 5)
        expected = 0
        for block, factor in zip(part.far, h.far_blocks):
            (tl, th), (sl, sh) = part.block_ranges(block)
            expected += factor.rank * ((th - tl) + (sh - sl)) * 8
        for block in part.near:
            (tl, th), (sl, sh) = part.block_ranges(block)
            expected += (th - tl) * (sh - sl) * 8
        assert storage_bytes(h) == expected

    def test_compressed_smaller_than_dense(self, inverse_system):
        # holds whenever the far field is nonempty and r is below the
        # smallest far-block dimension
        inv, part = inverse_system
        min_far_dim = min(min(th - tl, sh - sl)
                          for (tl, th), (sl, sh) in map(part.block_ranges, part.far))
        for r in (1, min(5, min_far_dim - 1)):
            h = compress(inv, part, r)
            assert storage_bytes(h) < 8 * inv.shape[0] ** 2


class TestBlockSingularValues:
    def test_counts_and_decay(self, inverse_system):
        inv, part = inverse_system
        spectra = block_singular_values(inv, part)
        assert len(spectra) == len(part.far)
        for sigma in spectra:
            assert np.all(np.diff(sigma) <= 1e-15)
            assert sigma[0] > 0

    def test_rank_one_block(self):
        from fraclap.cluster import BlockPartition, Block, BoundingBox, ClusterNode, ClusterTree

        nodes = [
            ClusterNode(np.array([0, 1]), BoundingBox([0.0], [1.0]), 0, 0, 2),
            ClusterNode(np.array([0]), BoundingBox([0.0], [0.0]), 1, 0, 1),
            ClusterNode(np.array([1]), BoundingBox([1.0], [1.0]), 1, 1, 2),
        ]
        nodes[0].children = (1, 2)
        tree = ClusterTree(nodes, np.array([0, 1]), 1)
        part = BlockPartition(tree, 2.0, [
            Block(1, 1, False), Block(2, 2, False),
            Block(1, 2, True), Block(2, 1, True),
        ])
        mtx = np.array([[1.0, 2.0], [3.0, 4.0]])
        spectra = block_singular_values(mtx, part)
        assert all(len(sig) == 1 for sig in spectra)
