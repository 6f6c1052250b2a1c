"""The exterior weight w(x): the kernel integrated over the domain complement.

Functions in the P1 space vanish outside the domain, so the part of the
bilinear form where one argument lives outside reduces to a weighted mass
term with weight w(x).  The weight blows up like dist(x, boundary)^(-2s)
towards the boundary, which is why the weighted element integrals use
dyadically graded cells there.

Run me:  python demos/03_exterior_weight.py
"""

import numpy as np

from fraclap import complement_weight, interval_mesh, lshape_mesh, unit_square_mesh

# 1d: the weight is analytic
m1 = interval_mesh(8)
print("interval, s = 0.5:")
for x in (0.5, 0.25, 0.1, 0.01):
    print(f"  w({x:4}) = {complement_weight(m1, [x], 0.5):10.4f}")

# 2d square: at the center with s = 1/2 the value is exactly 8*sqrt(2)
m2 = unit_square_mesh(8)
center = complement_weight(m2, [0.5, 0.5], 0.5)
print(f"\nsquare center, s = 0.5: {center:.12f}  (exact 8*sqrt(2) = {8*np.sqrt(2):.12f})")

print("approach to the boundary (s = 0.75):")
for d in (0.2, 0.05, 0.01):
    print(f"  dist {d:4}: w = {complement_weight(m2, [d, 0.5], 0.75):12.3f}")

# L-shape: the weight sees the reentrant notch
ml = lshape_mesh(4)
print("\nL-shape, s = 0.25, moving towards the reentrant corner:")
for x in (0.25, 0.4, 0.45, 0.49):
    print(f"  w(({x}, {x})) = {complement_weight(ml, [x, x], 0.25):10.4f}")
