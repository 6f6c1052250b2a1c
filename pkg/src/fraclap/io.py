"""File formats: FRACMAT1 dense matrices, mesh JSON, and the study CSV.

FRACMAT1 layout: 8 ASCII magic bytes "FRACMAT1", then rows and cols as 64-bit
little-endian unsigned integers, then rows*cols IEEE-754 doubles, little-endian,
row-major.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .mesh import Mesh

_MAGIC = b"FRACMAT1"


def write_matrix(path, matrix):
    a = np.ascontiguousarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("FRACMAT1 stores 2-d matrices")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQ", a.shape[0], a.shape[1]))
        fh.write(a.astype("<f8").tobytes(order="C"))


def read_matrix(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        rows, cols = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(rows * cols * 8), dtype="<f8")
        if data.size != rows * cols:
            raise ValueError("truncated FRACMAT1 file")
    return data.reshape(rows, cols).astype(np.float64, copy=True)


def write_mesh(path, mesh):
    """Mesh JSON: {"dim", "vertices", "elements", "boundary"} with 0/1 flags."""
    doc = {
        "dim": mesh.dim,
        "vertices": [[float(x) for x in v] for v in mesh.vertices],
        "elements": [[int(i) for i in e] for e in mesh.elements],
        "boundary": [int(b) for b in mesh.boundary_vertex],
    }
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def read_mesh(path):
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    return Mesh(
        doc["dim"],
        np.array(doc["vertices"], dtype=np.float64),
        np.array(doc["elements"], dtype=np.int64),
        np.array(doc["boundary"], dtype=bool),
    )
