"""
Repulsion fixes the final width
===============================

On a complete all-repulsive graph whose members start within c of one
another, the run ends with neighbours exactly c apart. The final width is
(n - 1) c regardless of where the group started.
"""

import numpy as np

from signedbc import ModelParams, complete_signed, make_rng, run
from signedbc.metrics import width

c = 0.25
rng = make_rng(3)
for n in (2, 3, 5, 8):
    x0 = rng.uniform(0.0, 0.9 * c, size=n)
    traj = run(x0, complete_signed(n), ModelParams(c=c), record=False)
    gaps = np.diff(np.sort(traj.final))
    print(f"n={n}: width {width(x0):.3f} -> {width(traj.final):.6f}"
          f"  (expected {(n - 1) * c:.3f}), gaps {np.round(gaps, 6)}")

# Two rivals: the push shrinks as they separate and stops at distance c.
traj = run([0.0, 0.1], complete_signed(2), ModelParams(c=c))
print("two-node separations:", np.round(np.ptp(traj.states, axis=1), 4))
