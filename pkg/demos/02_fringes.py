"""Coincidence fringes for a linear state at 22.5 deg, one per Alice outcome.

The four fringes peak at the analyzer angles Bob needs for each outcome.
A lower visibility flattens them but leaves the peaks in place.
"""

import numpy as np

from teleportsim.counts import NoiseModel, cell_rng, fit_fringe, simulate_sweep
from teleportsim.teleport import OUTCOMES, PrepSpec, verifier_setting

grid = np.arange(-90.0, 90.0, 2.0)
spec = PrepSpec(22.5)

for v in (1.0, 0.662):
    print(f"visibility {v}")
    for j, outcome in enumerate(OUTCOMES):
        recs = simulate_sweep(spec, outcome, grid, NoiseModel(visibility=v), 1000, cell_rng(0, j))
        fit = fit_fringe(recs)
        peak = verifier_setting(outcome, spec).theta_b
        print(
            f"  {outcome}: fitted max {fit.theta_max:7.2f} deg (expected {peak:6.1f}),"
            f" V = {fit.visibility:.3f} +- {fit.visibility_err:.3f}"
        )

# a crude text plot of one fringe
recs = simulate_sweep(spec, OUTCOMES[0], grid[::6], NoiseModel(visibility=0.662), 1000, cell_rng(1))
for r in recs:
    print(f"{r.theta_b:6.0f} {'#' * (r.count // 20)}")
