"""How well can Alice and Bob do without entanglement?

For the trine (0, 120, -120 deg) no measure-and-resend scheme beats an
average fidelity of 3/4. The grid search bounds every strategy from above;
the optimizer finds strategies that reach it.
"""

import time

import numpy as np

from teleportsim.classical import (
    Ensemble,
    classical_bound,
    max_t,
    measure_and_resend,
    optimize_strategy,
    s_value,
    validate_povm,
)

trine = Ensemble.trine()

scores = [s_value(measure_and_resend(a), trine) for a in range(0, 180, 15)]
print("measure and resend, 12 bases:", np.round(scores, 12))

start = time.perf_counter()
res = max_t(trine, 128)
print(f"max T = {res.t_max:.6f} from {len(res.argmax)} maximizing pairs ({time.perf_counter() - start:.1f} s)")
print("upper bound on S:", classical_bound(trine, res.t_max))

for outcomes in (2, 3, 4, 6):
    strat, s = optimize_strategy(trine, outcomes, restarts=50, rng=0)
    d = validate_povm(strat.povm)
    print(f"{outcomes} outcomes: S = {s:.12f}, mu = {np.round(d.mu, 3)}")

# two states 60 deg apart are easier to tell apart, so S rises above 3/4;
# here the 2 T_max / N certificate is valid but far from tight
pair = Ensemble.linear([0.0, 60.0])
_, s = optimize_strategy(pair, 2, restarts=20, rng=0)
print(f"two states 60 deg apart: S = {s:.4f}, bound {classical_bound(pair, max_t(pair, 128).t_max):.4f}")
