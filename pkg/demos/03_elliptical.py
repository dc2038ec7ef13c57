"""Elliptical polarization: a quarter-wave plate at 20 deg on the preparer side.

Bob undoes the ellipticity with his own quarter-wave plate, at an angle that
depends on Alice's outcome, and sees pure |v> or |h>.
"""

import numpy as np

from teleportsim.counts import NoiseModel, expected_count
from teleportsim.teleport import OUTCOMES, PrepSpec, transfer_matrices, verifier_setting

spec = PrepSpec(0.0, 20.0)
pol = spec.state()
print("prepared:", np.round(pol.vector, 4))

maps = transfer_matrices()
noise = NoiseModel(dark_rate=5.0)
for outcome in OUTCOMES:
    setting = verifier_setting(outcome, spec)
    out = setting.jones() @ maps[outcome] @ pol.vector
    par = expected_count(spec, outcome, setting, noise, 1000)
    perp = expected_count(spec, outcome, setting.rotated(90.0), noise, 1000)
    print(
        f"{outcome}: QWP at {setting.gamma_b:6.1f}, |v|^2 = {abs(out[0]) ** 2:.3f}, |h|^2 = {abs(out[1]) ** 2:.3f},"
        f" counts {par:.0f} vs {perp:.0f} (dark level {noise.dark_rate})"
    )
