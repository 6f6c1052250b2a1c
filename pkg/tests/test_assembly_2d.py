"""2d assembly: transform verification against frozen clip-oracle values,
structural matrix properties, and the weighted mass term."""

import json
from pathlib import Path

import numpy as np
import pytest

from fraclap._singular import edge_local_2d, identical_local_2d, vertex_local_2d
from fraclap.assembly import FracParams, QuadratureSpec, assemble_stiffness, load_vector
from fraclap.mesh import lshape_mesh, unit_square_mesh

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def pair_cases():
    with open(FIXTURES / "pair_integrals_2d.json") as fh:
        return json.load(fh)["cases"]


def _case(cases, kind, s):
    for c in cases:
        if c["kind"] == kind and c["s"] == s:
            return c
    raise KeyError((kind, s))


class TestSingularTransforms:
    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_identical(self, pair_cases, s):
        case = _case(pair_cases, "identical", s)
        t = np.array(case["tri1"])
        b = np.stack([t[1] - t[0], t[2] - t[1]], axis=1)[None]
        local = identical_local_2d(b, s, 12)[0]
        scale = max(abs(v) for v in case["values"].values())
        for key, ref in case["values"].items():
            a, bb = int(key[0]), int(key[1])
            assert local[a, bb] == pytest.approx(ref, abs=1e-7 * scale), key

    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_edge(self, pair_cases, s):
        case = _case(pair_cases, "edge", s)
        g = 0.25
        a_pt, b_pt = np.array([0.0, 0.0]), np.array([g, g])
        p_pt, q_pt = np.array([g, 0.0]), np.array([0.0, g])
        emat = np.stack([b_pt - a_pt, p_pt - b_pt, -(q_pt - b_pt)], axis=1)[None]
        jac = np.array([(g * g) * (g * g)])
        local = edge_local_2d(emat, jac, s, 12)[0]
        scale = max(abs(v) for v in case["values"].values())
        for key, ref in case["values"].items():
            a, bb = int(key[0]), int(key[1])
            assert local[a, bb] == pytest.approx(ref, abs=1e-7 * scale), key

    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_vertex(self, pair_cases, s):
        case = _case(pair_cases, "vertex", s)
        g = 0.25
        a_pt = np.array([g, g])
        p1, p2 = np.array([0.0, 0.0]), np.array([g, 0.0])
        q1, q2 = np.array([2 * g, g]), np.array([2 * g, 2 * g])
        vmat = np.stack([p1 - a_pt, p2 - p1, -(q1 - a_pt), -(q2 - q1)], axis=1)[None]
        jac = np.array([(g * g) * (g * g)])
        local = vertex_local_2d(vmat, jac, s, 12)[0]
        scale = max(abs(v) for v in case["values"].values())
        for key, ref in case["values"].items():
            a, bb = int(key[0]), int(key[1])
            assert local[a, bb] == pytest.approx(ref, abs=1e-7 * scale), key

    def test_identical_rows_sum_to_zero(self):
        # hat differences over one element sum to zero pointwise
        rng = np.random.default_rng(2)
        b = rng.standard_normal((4, 2, 2))
        local = identical_local_2d(b, 0.6, 8)
        assert np.max(np.abs(local.sum(axis=2))) < 1e-12

    def test_transform_order_convergence(self):
        g = 0.2
        a_pt, b_pt = np.array([0.0, 0.0]), np.array([g, g])
        p_pt, q_pt = np.array([g, 0.0]), np.array([0.0, g])
        emat = np.stack([b_pt - a_pt, p_pt - b_pt, -(q_pt - b_pt)], axis=1)[None]
        jac = np.array([(g * g) * (g * g)])
        ref = edge_local_2d(emat, jac, 0.75, 24)
        err6 = np.max(np.abs(edge_local_2d(emat, jac, 0.75, 6) - ref))
        err10 = np.max(np.abs(edge_local_2d(emat, jac, 0.75, 10) - ref))
        assert err10 < err6 * 1e-2


@pytest.fixture(scope="module")
def small_square_matrices():
    m = unit_square_mesh(6)
    q = QuadratureSpec()
    return m, {s: assemble_stiffness(m, FracParams(2, s), q) for s in (0.25, 0.5, 0.75)}


class TestStructure2d:
    def test_bitwise_symmetry(self, small_square_matrices):
        _, mats = small_square_matrices
        for a in mats.values():
            assert np.array_equal(a, a.T)

    def test_spd(self, small_square_matrices):
        _, mats = small_square_matrices
        for a in mats.values():
            np.linalg.cholesky(a)

    def test_disjoint_support_entries_negative(self, small_square_matrices):
        m, mats = small_square_matrices
        a = mats[0.5]
        rings = [set(m.elements[np.any(m.elements == v, axis=1)].ravel().tolist())
                 for v in m.vertex_of_dof]
        for i in range(m.num_dofs):
            for j in range(m.num_dofs):
                if not rings[i] & rings[j]:
                    assert a[i, j] < 0.0

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_lshape_spd(self, s):
        a = assemble_stiffness(lshape_mesh(2), FracParams(2, s), QuadratureSpec())
        assert np.array_equal(a, a.T)
        np.linalg.cholesky(a)

    def test_nonfinite_quadrature_names_pair(self):
        from fraclap.assembly import _check_finite
        from fraclap.errors import AssemblyError
        bad = np.zeros((3, 2, 2))
        bad[1, 0, 1] = np.nan
        with pytest.raises(AssemblyError, match=r"\[4 9\]"):
            _check_finite(bad, "disjoint-pair quadrature",
                          np.array([[1, 2], [4, 9], [5, 6]]))

    @pytest.mark.slow
    def test_quadrature_self_consistency(self, small_square_matrices):
        m, mats = small_square_matrices
        for s in (0.25, 0.75):
            a2 = assemble_stiffness(m, FracParams(2, s), QuadratureSpec(6, 8, 10))
            rel = np.max(np.abs(mats[s] - a2) / np.abs(a2))
            assert rel < 1e-6, f"s={s}: {rel}"


class TestLoadVector2d:
    def test_constant_one_equals_ring_area_third(self):
        m = unit_square_mesh(4)
        b = load_vector(m, lambda x: np.ones(len(x)), QuadratureSpec())
        areas = m.element_measures()
        for dof in range(m.num_dofs):
            vertex = m.vertex_of_dof[dof]
            ring = np.any(m.elements == vertex, axis=1)
            assert b[dof] == pytest.approx(areas[ring].sum() / 3.0, rel=1e-12)
