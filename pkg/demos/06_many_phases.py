"""
Energy of many phases
=====================

With k phases in a square of unit area, the optimal energy divided by k^(3/2) is
expected to approach beta times the Cheeger constant of the unit-area hexagon as k
grows. At desk scale only the first few terms can be computed.
"""

from robinpart import honeycomb_scaling

table = honeycomb_scaling(beta=1.0, side=1.0, k_values=[1, 4, 9], h=1 / 32, seeds=[42, 43])
print(f"target beta*h(H) = {table.target:.6f}")
for row in table.rows:
    print(f"k={row.k:2d}  best energy={row.best_energy:9.4f}  scaled={row.scaled:.4f}  ratio={row.ratio_to_limit:.3f}")

# %%
# The best nine-phase partition.
state = table.states[(9, table.rows[-1].best_seed)]
for row in state.labels()[::2]:
    print("".join("." if v < 0 else chr(ord("a") + v) for v in row))
