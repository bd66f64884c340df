"""Counting orbit points in growing balls.

Enumerate the orbit of the origin under a few groups and watch how fast the
number of points inside a ball of radius R grows.  The exponential rate is the
critical exponent; a cyclic group grows only linearly, so its rate is 0.

Run:  python demos/01_orbit_counting.py
"""

import math

import numpy as np

from psworkbench.groups import annuli_counts, get_preset
from psworkbench.series import estimate_delta_counting, estimate_delta_partial_sum

# cyclic_axial: one hyperbolic translation of length 2.  The orbit sits on a
# single geodesic, two new points every 2 units of radius.
ball = get_preset("cyclic_axial").ball(10.0)
print("cyclic, radius 10:", len(ball), "elements")
print("  distances:", np.round(np.sort(ball.distances), 6).tolist())

# a parabolic generator z -> z + 1 grows like e^{R/2}
par = get_preset("cyclic_parabolic").ball(12.0)
counts = np.cumsum(annuli_counts(par))
for n in (4, 8, 12):
    print(f"parabolic N({n:2d}) = {counts[n]:4d}   4 sinh(n/2) = {4 * math.sinh(n / 2):7.1f}")

# Schottky group with perpendicular axes.  The counting estimate fits the
# growth of N(R); the partial-sum estimate finds where the series turns over.
for name in ("cyclic_axial", "cyclic_parabolic", "schottky_perp"):
    ball = get_preset(name).ball(12.0 if name != "cyclic_axial" else 30.0)
    dc = estimate_delta_counting(annuli_counts(ball))
    dps = estimate_delta_partial_sum(ball)
    lo, hi = dc.interval
    print(f"{name:17s} |ball| = {len(ball):6d}  delta_counting = {dc.value:.3f} [{lo:.3f}, {hi:.3f}]"
          f"  delta_partial_sum = {dps:.3f}")

# annuli for the Schottky ball: roughly geometric growth after the first few
ann = annuli_counts(get_preset("schottky_perp").ball(12.0))
print("schottky annuli:", ann.tolist())
ratio = ann[8:] / ann[7:-1]
print("  successive ratios:", np.round(ratio, 2).tolist())
