"""The twelve-cell measurement of S at visibility 0.662.

Each (state, outcome) cell counts coincidences with Bob's analyzer along
and across the expected direction. S is their mean fidelity.
"""

from teleportsim.counts import NoiseModel, analytic_s, estimate_s, simulate_experiment

noise = NoiseModel(visibility=0.662)
cells = simulate_experiment(noise, pairs_per_cell=1000, seed=0)
est = estimate_s(cells)

for (theta, outcome), f in est.per_cell.items():
    par, perp = cells[(theta, outcome)]
    print(f"{theta:7.1f} {outcome!s:3}  {par.count:4d} / {perp.count:4d}  F = {f:.3f}")

print(f"S = {est.value:.4f} +- {est.std_err:.4f}  ({est.sigma_violation:.1f} sigma above 3/4)")
print(f"expected (1 + V)/2 = {analytic_s(noise):.4f}")

# how S tracks visibility
for v in (0.4, 0.5, 0.6, 0.7, 0.8):
    s = estimate_s(simulate_experiment(NoiseModel(visibility=v), 1000, seed=1)).value
    print(f"V = {v:.1f}: S = {s:.3f}")
