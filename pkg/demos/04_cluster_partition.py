"""Cluster tree and admissible block partition of the dof index set.

Run me:  python demos/04_cluster_partition.py
"""

import numpy as np

from fraclap import (
    build_cluster_tree,
    build_partition,
    is_admissible,
    sparsity_constant,
    unit_square_mesh,
)
from fraclap.cluster import BoundingBox, partition_to_csv

# Admissibility compares box diameters against the box distance.
b1 = BoundingBox(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
b2 = BoundingBox(np.array([3.0, 0.0]), np.array([4.0, 1.0]))
b3 = BoundingBox(np.array([1.1, 0.0]), np.array([2.1, 1.0]))
print("admissible at eta=2:")
print(f"  unit boxes 2 apart: {is_admissible(b1, b2, 2.0)}")
print(f"  unit boxes 0.1 apart: {is_admissible(b1, b3, 2.0)}")

# Geometric bisection until clusters have at most n_leaf = 20 dofs.
mesh = unit_square_mesh(18)
tree = build_cluster_tree(mesh, 20)
sizes = sorted(node.size for node in tree.leaves())
print(f"\ntree over N = {mesh.num_dofs}: depth {tree.depth}, "
      f"{len(tree.leaves())} leaves, sizes {sizes[0]}..{sizes[-1]}")

partition = build_partition(tree, 2.0)
covered = sum(tree.nodes[b.tau].size * tree.nodes[b.sigma].size
              for b in partition.blocks)
print(f"partition: {len(partition.far)} admissible and {len(partition.near)} "
      f"non-admissible blocks")
print(f"covers the index set exactly once: {covered == mesh.num_dofs ** 2}")
print(f"sparsity constant: {sparsity_constant(partition)}")

print("\nfirst partition dump lines (tau_lo,tau_hi,sigma_lo,sigma_hi,admissible):")
print("\n".join(partition_to_csv(partition).splitlines()[:5]))
