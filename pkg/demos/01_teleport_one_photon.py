"""Walk one photon through the apparatus, element by element.

Run with ``python3 demos/01_teleport_one_photon.py``.
"""

import numpy as np

from teleportsim.qstate import Mode, PureState, apply
from teleportsim.teleport import (
    PrepSpec,
    alice_measure,
    bob_conditional,
    corrective_unitary,
    decompose,
    fidelity,
    make_epr,
    prepare_unknown,
)

rng = np.random.default_rng(7)

# the source emits (|v>|h> + |h>|v>)/sqrt2; two calcite encoders turn that
# into path entanglement with fixed polarizations
epr = make_epr()
print("EPR pair:", epr.pruned())

# the preparer turns photon 1 (on both paths) to linear polarization at 30 deg
spec = PrepSpec(30.0)
joint, prepared = prepare_unknown(spec, epr)
print("prepared alpha, beta:", np.round([prepared.alpha, prepared.beta], 4))

# before any measurement the joint state splits evenly over four branches
for outcome, (coeff, cond) in decompose(joint).items():
    print(f"  {outcome}: coefficient {coeff.real:.3f}, Bob's path state {cond}")

# Alice: 90 deg turn on b1, beamsplitter, polarization-resolved detectors
outcome, collapsed = alice_measure(joint, rng)
print("Alice clicked:", outcome)

# Bob: rotate b2, merge both paths on the PBS, read the polarization
bob = bob_conditional(outcome, collapsed)
print("Bob before correction:", np.round(bob.vector, 4), "fidelity", round(fidelity(prepared, bob), 4))

# after two classical bits Bob applies the matching correction
out = apply(corrective_unitary(outcome), PureState.from_dict(
    {(Mode(2, "B", "v"),): bob.alpha, (Mode(2, "B", "h"),): bob.beta}
))
fixed = np.array([out.amplitude(Mode(2, "B", "v")), out.amplitude(Mode(2, "B", "h"))])
print("Bob after correction:", np.round(fixed, 4))
print("overlap with the prepared state:", round(abs(np.vdot(prepared.vector, fixed)) ** 2, 12))
