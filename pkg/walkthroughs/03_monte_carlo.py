"""
Simulated excess profit with and without mitigation
===================================================

Paired Monte Carlo runs: each run replays one proposer sequence twice,
once with X's empty block and once without, until the fee recovers.
"""

from basefee.mechanism import Eip1559, GeometricAvg
from basefee.simulator import Axis, SimConfig, classify_grid, sweep

config = SimConfig(runs=4_000, base_seed=1)
kinds = [Eip1559(), GeometricAvg(0.25), GeometricAvg(0.5), GeometricAvg(0.75)]

for row in sweep(config, Axis.PX, [0.2, 0.3, 0.4, 0.5], kinds):
    s = row.summary
    print(f"p_x={row.axis_value:.1f} {row.kind.label():>9}  {s.mean_excess:+.5f} +- {s.ci_half_width:.5f}")

# where does q = 1/2 remove the incentive?
px = [0.1, 0.2, 0.3, 0.4, 0.5]
eps = [0.01, 0.04, 0.1]
grid = classify_grid(px, eps, 0.5, SimConfig(runs=1_000))
for p, row in zip(px, grid):
    print(f"p_x={p:.1f}  " + "  ".join(f"{cell.value:>15}" for cell in row))
