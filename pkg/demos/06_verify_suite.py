"""
Checking the analytic results numerically
=========================================

The verify module replays the model's provable properties on random
instances. One extra check probes a width bound that is only conjectured;
it turns up counterexamples, which are reported as findings together with
seeds that rebuild them.
"""

from signedbc import ModelParams, run
from signedbc.metrics import width
from signedbc.verify import mixed_instance, run_suite

reports = run_suite("all", seed=2024)
for rep in reports:
    print(rep.summary())

conj = next(r for r in reports if r.name == "conjectured_bound")
if conj.violations:
    v = conj.violations[0]
    g, c, x0 = mixed_instance(v["seed"])
    final = run(x0, g, ModelParams(c=c), record=False).final
    print(f"replay seed {v['seed']}: n={g.n}, m={g.m}, c={c:.4f},"
          f" width {width(x0):.4f} -> {width(final):.4f} > max(width, m c) = {max(width(x0), g.m * c):.4f}")
