"""
Density and surface-density probes
==================================

Two scale-invariant ratios measured on the phases of a four-phase optimum:
the volume density |S n B_r(x)| / r^2 and the boundary density
|boundary(S) n B_r(x)| / r, at radii 4h, 8h and 16h around boundary points.
"""

import math

from robinpart import OptimizerConfig, make_grid, optimize, probe_state

state, _ = optimize(OptimizerConfig(grid=make_grid([1.0, 1.0], 1 / 64), k=4, beta=1.0, seed=42))

for phase, rep in probe_state(state):
    ranges = "  ".join(f"r={r:.3f}:[{lo:.3f},{hi:.3f}]" for r, lo, hi in zip(rep.radii, rep.ratio_min, rep.ratio_max))
    print(f"phase {phase} {rep.name:>8}: {ranges}  pass={rep.passed}")

# %%
# For comparison: a point on a straight edge has density pi/2 and boundary density 2.
print("half disk density:", round(math.pi / 2, 4), " flat boundary density: 2")
