"""
Cheeger constants of convex polygons
====================================

For a convex planar set the Cheeger constant is 1/t, where t solves
|inner parallel body at distance t| = pi t^2. The inner parallel body of a polygon
is obtained by clipping with the inward-shifted edge half-planes.
"""

import math

from robinpart import cheeger_convex_polygon, cheeger_disk, defining_residual, regular_polygon

# %%
# Regular polygons of unit area approach the disk value 2 sqrt(pi) = 3.5449.
for n in (3, 4, 6, 12, 64):
    v = regular_polygon(n, area=1.0)
    h = cheeger_convex_polygon(v)
    print(f"{n:3d}-gon  h={h:.10f}  residual={defining_residual(v, h):.1e}")
print(f"disk     h={cheeger_disk(1 / math.sqrt(math.pi)):.10f}")

# %%
# The unit-area hexagon gives the constant that governs how the optimal energy of
# many small phases grows with their number.
print("h(hexagon) =", round(cheeger_convex_polygon(regular_polygon(6, area=1.0)), 10))

# %%
# Non-convex input is refused.
try:
    cheeger_convex_polygon([(0, 0), (2, 0), (1, 0.3), (2, 2), (0, 2)])
except ValueError as exc:
    print(type(exc).__name__, exc)
