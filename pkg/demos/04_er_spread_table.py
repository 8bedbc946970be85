"""
Spread across repulsion ratio and confidence
============================================

A reduced version of the ER parameter sweep. Each cell averages the
opinion spread (final width / initial width) over a handful of trials and
the table is laid out by confidence bound c (rows) and the ratio p2/p1
(columns). Values above 1 mean the network ended wider than it started.

The full grid is available as the ``er-paper`` preset (``signedbc sweep
--preset er-paper``); it takes about a minute at 25 trials per cell.
"""

from signedbc.sweep import SweepConfig, run_sweep, spread_table

cfg = SweepConfig(topology="er", n=60, p1_grid=(0.2, 0.4, 0.8), p2_grid=(0.0, 0.2, 0.4, 0.8),
                  c_grid=(0.1, 0.4, 0.8, 1.6), trials=5, master_seed=7)
result = run_sweep(cfg)
table = spread_table(result)

ratios = sorted({r for row in table.values() for r in row})
print("c \\ p2/p1 " + "".join(f"{r:>8.2f}" for r in ratios))
for c, row in sorted(table.items()):
    cells = "".join(f"{row[r]:8.2f}" if r in row else " " * 8 for r in ratios)
    print(f"{c:<10.2f}" + cells)
