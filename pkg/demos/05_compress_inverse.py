"""Compress the inverse stiffness matrix blockwise and watch the error decay.

The inverse is dense, but over the admissible partition its far-field blocks
have rapidly decaying singular values, so truncating them at a small rank
reproduces the whole matrix to high accuracy.  At this demo size (N = 289)
the near field still dominates the byte count; the storage advantage grows
with N, where the compressed format scales like N log N instead of N^2.

Run me:  python demos/05_compress_inverse.py   (about a minute)
"""

import numpy as np

from fraclap import (
    FracParams,
    QuadratureSpec,
    approximation_error,
    assemble_stiffness,
    build_cluster_tree,
    build_partition,
    compress,
    hmatvec,
    lu_invert,
    storage_bytes,
    unit_square_mesh,
)

mesh = unit_square_mesh(18)
print(f"mesh: {mesh.num_elements} elements, N = {mesh.num_dofs}")

a = assemble_stiffness(mesh, FracParams(2, 0.5), QuadratureSpec())
inv, residual = lu_invert(a)
print(f"inverted (residual {residual:.2e})")

tree = build_cluster_tree(mesh, 20)
partition = build_partition(tree, 2.0)
norm_inv = np.linalg.norm(inv, 2)
dense_bytes = 8 * mesh.num_dofs ** 2
print(f"partition: {len(partition.far)} far / {len(partition.near)} near blocks; "
      f"dense storage {dense_bytes} bytes\n")

print(" rank   error/||inv||    storage    fraction")
for r in (1, 2, 4, 8, 12, 20):
    h = compress(inv, partition, r)
    err = approximation_error(inv, h)
    bytes_ = storage_bytes(h)
    print(f"   {r:2d}   {err.value / norm_inv:12.3e}   {bytes_:8d}    "
          f"{bytes_ / dense_bytes:6.1%}")

# the compressed operator acts like the inverse
h = compress(inv, partition, 12)
x = np.sin(np.arange(mesh.num_dofs))
err = np.linalg.norm(hmatvec(h, x) - inv @ x) / np.linalg.norm(inv @ x)
print(f"\nmatvec relative deviation at rank 12: {err:.2e}")
