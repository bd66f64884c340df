"""Conservative or dissipative?  Reading the boundary dynamics.

For a divergence-type group almost every limit point (for the
Patterson-Sullivan measure) is conical, and the geodesic flow is
conservative.  The report samples pairs of endpoints from the product
measure, then tests each ray for conical approach and for Myrberg-type
recurrence, and puts those readings next to the series test.

Run:  python demos/03_dichotomy_report.py   (about a second for Schottky at R=12)
"""

import math

from psworkbench.dynamics import Thresholds, conical_statistic, conservativity_report, settled_below
from psworkbench.groups import get_preset
from psworkbench.hyperbolic import ORIGIN

for name, R in (("schottky_perp", 12.0), ("cyclic_axial", 30.0)):
    rep = conservativity_report(get_preset(name), R, samples=20, seed=1).to_dict()
    print(f"{name} at radius {R:g}: verdict {rep['verdict']}")
    for key, ind in rep.get("indicators", {}).items():
        shown = ind.get("value", ind.get("verdict"))
        print(f"  {key:20s} {shown!s:>10.10}  {ind['reading']}")
    if "myrberg" in rep:
        a, b = rep["myrberg"]["median_eps"]
        print(f"  Myrberg median eps {a:.3f} -> {b:.3f}")

# One ray by hand.  Along a direction inside a ping-pong gap the orbit never
# comes close, so the conical distance stays large.
ball = get_preset("schottky_perp").ball(12.0)
thr = Thresholds().conical_threshold(ORIGIN, ORIGIN)
for theta in (0.0, math.pi / 4):
    prof = conical_statistic(theta, ball, ORIGIN)
    last = prof[-1][1]
    print(f"direction {theta:.3f}: final conical distance {last:.3f}, settled below {thr:.2f}:"
          f" {settled_below(prof, thr)}")
