"""
Why the repulsive push is scaled
================================

Three people on a line: 0 and 2 are rivals, 1 is friends with both. With
the push proportional to the raw opinion difference, the group never
settles. The scaled push, which fades as rivals reach the confidence
bound, settles in three steps.
"""

from signedbc import ModelParams, build_signed_graph, run

graph = build_signed_graph(3, [(0, 2, -1), (0, 1, 1), (1, 2, 1)])
x0 = [1.0, 0.5, 0.0]

scaled = run(x0, graph, ModelParams(c=0.6))
print(f"scaled: converged={scaled.converged} at T={scaled.stopping_time}, final={scaled.final.round(6)}")

naive = run(x0, graph, ModelParams(c=0.6, variant="naive", detect_cycles=True))
print(f"naive:  converged={naive.converged} after {naive.steps} steps,"
      f" cycle={naive.cycle_detected} ({naive.cycle_kind}, length {naive.cycle_length})")
for t in range(6):
    print(f"  t={t}: {naive.states[t].round(4)}")
