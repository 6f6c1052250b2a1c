"""Build the three supported domains and look at their basic quantities.

Run me:  python demos/01_meshes.py
"""

import numpy as np

from fraclap import interval_mesh, lshape_mesh, refine, support_box, unit_square_mesh

# A mesh knows its vertices, elements, boundary flags, and the numbering of
# the interior vertices (the degrees of freedom of the P1 space).
for name, mesh in (
    ("interval, 8 cells", interval_mesh(8)),
    ("unit square, 6x6 cells", unit_square_mesh(6)),
    ("L-shape, 3 cells per quadrant edge", lshape_mesh(3)),
):
    print(f"{name}:")
    print(f"  {mesh.num_elements} elements, {len(mesh.vertices)} vertices, "
          f"N = {mesh.num_dofs} interior dofs")
    print(f"  mesh width h = {mesh.h:.4f}, covered area = "
          f"{mesh.element_measures().sum():.4f}")
    print(f"  shape regularity (diameter / inscribed diameter) = "
          f"{mesh.shape_regularity():.3f}")

# Uniform red refinement splits every simplex into 2^d similar children.
coarse = unit_square_mesh(3)
fine = refine(coarse)
print(f"\nred refinement: {coarse.num_elements} -> {fine.num_elements} elements, "
      f"h {coarse.h:.3f} -> {fine.h:.3f}")

# The support box of a dof bounds the patch of elements around its vertex;
# cluster trees are built from these boxes.
m = unit_square_mesh(4)
lo, hi = support_box(m, 0)
print(f"\nsupport box of dof 0 on the 4x4 square: {lo} .. {hi}")

# The polygon of the domain boundary is recovered from the boundary edges.
print("L-shape corner polygon:")
print(np.round(lshape_mesh(2).domain_polygon(), 3))
