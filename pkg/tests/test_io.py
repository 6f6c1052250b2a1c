import numpy as np
import pytest

from fraclap import io as fio
from fraclap.mesh import lshape_mesh, unit_square_mesh


class TestFracmat:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((5, 3))
        path = tmp_path / "a.mat"
        fio.write_matrix(path, a)
        b = fio.read_matrix(path)
        assert a.dtype == b.dtype
        assert np.array_equal(a, b)

    def test_layout(self, tmp_path):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        path = tmp_path / "a.mat"
        fio.write_matrix(path, a)
        raw = path.read_bytes()
        assert raw[:8] == b"FRACMAT1"
        assert int.from_bytes(raw[8:16], "little") == 2
        assert int.from_bytes(raw[16:24], "little") == 2
        assert np.frombuffer(raw[24:], dtype="<f8").tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.mat"
        path.write_bytes(b"NOTMAT00" + b"\0" * 16)
        with pytest.raises(ValueError, match="magic"):
            fio.read_matrix(path)

    def test_rejects_nonfinite(self, tmp_path):
        with pytest.raises(ValueError):
            fio.write_matrix(tmp_path / "x.mat", np.array([[np.inf]]))


class TestMeshJson:
    def test_round_trip(self, tmp_path):
        m = lshape_mesh(2)
        path = tmp_path / "m.json"
        fio.write_mesh(path, m)
        m2 = fio.read_mesh(path)
        assert np.array_equal(m.vertices, m2.vertices)
        assert np.array_equal(m.elements, m2.elements)
        assert np.array_equal(m.boundary_vertex, m2.boundary_vertex)
        assert m.h == m2.h

    def test_rewrite_is_byte_identical(self, tmp_path):
        m = unit_square_mesh(3)
        p1 = tmp_path / "m1.json"
        p2 = tmp_path / "m2.json"
        fio.write_mesh(p1, m)
        fio.write_mesh(p2, fio.read_mesh(p1))
        assert p1.read_bytes() == p2.read_bytes()
