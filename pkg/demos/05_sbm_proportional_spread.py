"""
Groups pull apart when they mostly talk among themselves
========================================================

In the signed block model, cross-group pairs connect with probabilities
scaled by rho. Proportional spread is the mean in-group distance divided
by the mean out-group distance, so lower values mean groups are more
internally cohesive relative to each other. Random starting opinions give
a value just under 1.
"""

import numpy as np

from signedbc import ModelParams, compute_report, generate_sbm_signed, make_rng, run

n, k, p1, p2, c = 100, 5, 0.8, 0.2, 0.4
for rho in (1.0, 0.4, 0.1, 0.05):
    ps, ps0 = [], []
    for trial in range(10):
        g = generate_sbm_signed(n, k, p1, p2, rho, make_rng(100 + trial))
        traj = run(make_rng(200 + trial).random(n), g, ModelParams(c=c), record=False)
        rep = compute_report(traj.initial, traj.final, c, groups=g.group_of)
        ps.append(rep.proportional_spread)
        ps0.append(rep.initial_proportional_spread)
    print(f"rho={rho:<5} PS at start {np.mean(ps0):.3f}  PS at end {np.mean(ps):.3f}")
