"""Simulator of two-photon (path-entanglement) quantum teleportation.

Modules
-------
qstate     labeled state vectors, unitaries and projective measurement
optics     Jones-calculus elements and the apparatus mode layout
teleport   preparation, Bell-type analysis, Bob's conditional states
classical  measure-and-resend strategies and the S <= 3/4 certificate
counts     Monte Carlo coincidence counts, fidelity and visibility estimators
cli        command-line interface
"""

__version__ = "0.1.0"

from .classical import Ensemble, max_t, optimize_strategy, s_value, t_value
from .counts import NoiseModel, estimate_s, simulate_experiment, simulate_sweep
from .teleport import (
    BellOutcome,
    PolState,
    PrepSpec,
    VerifierSetting,
    alice_measure,
    bob_conditional,
    corrective_unitary,
    decompose,
    fidelity,
    make_epr,
    prepare_unknown,
    transfer_matrices,
    verifier_setting,
)

__all__ = [
    "BellOutcome",
    "Ensemble",
    "NoiseModel",
    "PolState",
    "PrepSpec",
    "VerifierSetting",
    "alice_measure",
    "bob_conditional",
    "corrective_unitary",
    "decompose",
    "estimate_s",
    "fidelity",
    "make_epr",
    "max_t",
    "optimize_strategy",
    "prepare_unknown",
    "s_value",
    "simulate_experiment",
    "simulate_sweep",
    "t_value",
    "transfer_matrices",
    "verifier_setting",
]
