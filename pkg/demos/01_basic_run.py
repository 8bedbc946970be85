"""
A first signed-network run
==========================

Build a small signed random graph, start everyone at a uniform opinion
and iterate until nothing moves. Then summarise the outcome.
"""

import numpy as np

from signedbc import ModelParams, compute_report, generate_er_signed, make_rng, run

# 60 people; 40% of pairs are friends, 20% are rivals
graph = generate_er_signed(60, p1=0.4, p2=0.2, rng=make_rng(1))
print(f"n={graph.n}  attractive edges={graph.m_a}  repulsive edges={graph.m_r}")

x0 = make_rng(2).random(graph.n)
traj = run(x0, graph, ModelParams(c=0.4))
print(f"converged={traj.converged} after {traj.stopping_time} steps")

# each row of traj.states is one time step
np.set_printoptions(precision=3, suppress=True)
print("first five opinions at t=0, 1, T:")
print(traj.states[[0, 1, -1], :5])

report = compute_report(traj.initial, traj.final, c=0.4)
print(f"width {report.initial_width:.3f} -> {report.final_width:.3f}"
      f"  spread={report.opinion_spread:.2f} clusters={report.cluster_count} regime={report.regime}")
