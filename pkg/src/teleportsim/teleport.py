"""Two-photon teleportation pipeline.

The EPR resource is path entanglement of photons 1 and 2; the state to be
teleported lives in the polarization of photon 1. Alice's Bell-type
measurement acts on path x polarization of photon 1 and Bob receives his
conditional state in the path of photon 2, which his PBS converts back into
polarization.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import optics
from .qstate import (
    TOL,
    Mode,
    PureState,
    StateError,
    UnitaryOp,
    apply,
    apply_all,
    outcome_probabilities,
    project,
    project_measure,
    sample_outcomes,
    tensor,
)


class ShapeError(StateError):
    """Joint state is not of the product form path-EPR x polarization x |h>_2."""


@dataclass(frozen=True)
class PolState:
    """Polarization state ``alpha|v> + beta|h>``."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ValueError("amplitudes must be finite")
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > TOL:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {abs(a) ** 2 + abs(b) ** 2!r} != 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def from_vector(cls, vec) -> PolState:
        vec = np.asarray(vec, dtype=complex)
        return cls(vec[0], vec[1])

    @classmethod
    def linear(cls, theta: float) -> PolState:
        return cls.from_vector(optics.linear_pol(theta))

    @classmethod
    def random(cls, rng: np.random.Generator) -> PolState:
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        return cls.from_vector(z / np.linalg.norm(z))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta])

    def transformed(self, jones: np.ndarray) -> PolState:
        return PolState.from_vector(jones @ self.vector)


class BellOutcome(enum.Enum):
    C_PLUS = "c+"
    C_MINUS = "c-"
    D_PLUS = "d+"
    D_MINUS = "d-"

    def __str__(self) -> str:
        return self.value


OUTCOMES = tuple(BellOutcome)


@dataclass(frozen=True)
class PrepSpec:
    """Preparer settings in degrees.

    Without ``gamma`` the prepared state is linear polarization at ``theta``
    from horizontal. With ``gamma`` a quarter-wave plate at ``gamma`` from
    vertical acts on the source's vertical polarization and ``theta`` is an
    additional rotator turn after it (``theta = 0`` means none).
    """

    theta: float = 0.0
    gamma: float | None = None

    @property
    def elliptical(self) -> bool:
        return self.gamma is not None

    def jones(self) -> np.ndarray:
        """Preparer action on the vertically polarized photon 1."""
        if self.gamma is None:
            return optics.jones_rotator(self.theta - 90.0)
        return optics.jones_rotator(self.theta) @ optics.jones_qwp(self.gamma)

    def state(self) -> PolState:
        return PolState.from_vector(self.jones() @ np.array([1.0, 0.0]))


@dataclass(frozen=True)
class VerifierSetting:
    """Bob's analyzer: optional QWP at ``gamma_b`` then linear analyzer at ``theta_b``."""

    theta_b: float
    gamma_b: float | None = None

    def jones(self) -> np.ndarray:
        return np.eye(2) if self.gamma_b is None else optics.jones_qwp(self.gamma_b)

    def transmission(self, pol: PolState) -> float:
        """Probability of a click at D_B(theta_b)."""
        return abs(np.vdot(optics.linear_pol(self.theta_b), self.jones() @ pol.vector)) ** 2

    def rotated(self, delta: float) -> VerifierSetting:
        return VerifierSetting(self.theta_b + delta, self.gamma_b)


# -- state preparation -------------------------------------------------------

def source_state() -> PureState:
    """Down-conversion output (|v>_1|h>_2 + |h>_1|v>_2)/sqrt2, both photons in path s."""
    s = optics.SOURCE
    r = 1.0 / np.sqrt(2.0)
    return PureState.from_dict(
        {
            (Mode(1, s, "v"), Mode(2, s, "h")): r,
            (Mode(1, s, "h"), Mode(2, s, "v")): r,
        }
    )


def make_epr() -> PureState:
    """(|a1 a2> + |b1 b2>)/sqrt2 |v>_1 |h>_2 from the calcite encoders."""
    state = optics.apply_calcite(source_state(), 1)
    return optics.apply_calcite(state, 2)


def preparer_ops(spec: PrepSpec) -> list[UnitaryOp]:
    """The preparer's plates, acting identically on paths a1 and b1."""
    return [optics.on_path(spec.jones(), 1, path) for path in ("a", "b")]


def prepare_unknown(spec: PrepSpec, epr: PureState | None = None) -> tuple[PureState, PolState]:
    if epr is None:
        epr = make_epr()
    return apply_all(preparer_ops(spec), epr).pruned(), spec.state()


def joint_state(pol: PolState) -> PureState:
    """(|a1 a2> + |b1 b2>)/sqrt2 (alpha|v>_1 + beta|h>_1)|h>_2 for an arbitrary ``pol``."""
    r = 1.0 / np.sqrt(2.0)
    amps = {}
    for path in ("a", "b"):
        for pol_label, c in zip(optics.POLS, pol.vector):
            amps[(Mode(1, path, pol_label), Mode(2, path, "h"))] = r * c
    return PureState.from_dict(amps)


# -- Alice ---------------------------------------------------------------------

def bell_basis() -> dict[BellOutcome, PureState]:
    """|c+-> = (|a1,v> +- |b1,h>)/sqrt2 and |d+-> = (|a1,h> +- |b1,v>)/sqrt2."""
    r = 1.0 / np.sqrt(2.0)
    av, ah = optics.modes(1, "a")
    bv, bh = optics.modes(1, "b")

    def pair(m1, m2, sign):
        return PureState.from_dict({(m1,): r, (m2,): sign * r})

    return {
        BellOutcome.C_PLUS: pair(av, bh, 1),
        BellOutcome.C_MINUS: pair(av, bh, -1),
        BellOutcome.D_PLUS: pair(ah, bv, 1),
        BellOutcome.D_MINUS: pair(ah, bv, -1),
    }


def decompose(joint: PureState) -> dict[BellOutcome, tuple[complex, PureState]]:
    """Expand a prepared joint state over the Bell-type basis of photon 1.

    Each value is ``(coefficient, conditional photon-2 state)`` with the
    coefficient real and positive; for an input of the expected shape every
    coefficient is 1/2 and the conditional states are alpha|a2>+beta|b2>,
    alpha|a2>-beta|b2>, beta|a2>+alpha|b2>, beta|a2>-alpha|b2> (all ``h``).
    """
    _check_shape(joint)
    out = {}
    for outcome, effect in bell_basis().items():
        raw = project(joint, effect)
        out[outcome] = (complex(raw.norm), raw.renormalized())
    return out


def _check_shape(joint: PureState) -> None:
    if joint.photons != (1, 2):
        raise ShapeError("expected a two-photon state of photons 1 and 2")
    d = joint.pruned().as_dict()
    for (m1, m2), amp in d.items():
        if m1.path not in ("a", "b") or m2.pol != "h" or m1.path != m2.path:
            raise ShapeError(f"unexpected amplitude {amp:.3g} on {m1}, {m2}")
    for pol in optics.POLS:
        a = d.get((Mode(1, "a", pol), Mode(2, "a", "h")), 0j)
        b = d.get((Mode(1, "b", pol), Mode(2, "b", "h")), 0j)
        if abs(a - b) > joint.tol * 10:
            raise ShapeError("path amplitudes are not those of the EPR pair")


def recompose(branches: dict[BellOutcome, tuple[complex, PureState]]) -> PureState:
    """Sum ``coefficient * |bell> x |conditional>`` back into a joint state."""
    basis = bell_basis()
    total: dict = {}
    for outcome, (coeff, cond) in branches.items():
        term = tensor(basis[outcome], cond)
        for entry, amp in term.as_dict().items():
            total[entry] = total.get(entry, 0j) + coeff * amp
    return PureState.from_dict(total, normalized=False)


# Alice's detectors: (port, polarization) -> outcome. With polarizers at v a
# click at A+- is c+-; with polarizers at h it is d-+.
PORT_OUTCOME = {
    ("A+", "v"): BellOutcome.C_PLUS,
    ("A-", "v"): BellOutcome.C_MINUS,
    ("A+", "h"): BellOutcome.D_MINUS,
    ("A-", "h"): BellOutcome.D_PLUS,
}


def alice_analyzer(phase: float = 0.0, extra: Sequence[UnitaryOp] = ()) -> list[UnitaryOp]:
    """Extra 90 degree turn on b1, path-length phase on b1, then the 50:50 beamsplitter.

    ``extra`` elements (acting on the a/b paths) are inserted first.
    """
    ops = list(extra) + [optics.rotator(90.0, 1, "b")]
    if phase:
        ops.append(optics.phase_delay(phase, 1, "b"))
    ops.append(optics.beamsplitter5050(1))
    return ops


def _port_effects() -> list[PureState]:
    return [PureState.basis_state(Mode(1, port, pol)) for port, pol in PORT_OUTCOME]


def alice_measure(
    joint: PureState, rng: np.random.Generator, phase: float = 0.0
) -> tuple[BellOutcome, PureState]:
    """Run photon 1 through the analyzer and sample a detector click.

    Returns the outcome and Bob's collapsed photon-2 path state.
    """
    after = apply_all(alice_analyzer(phase), joint)
    k, cond, _ = project_measure(after, _port_effects(), rng)
    return list(PORT_OUTCOME.values())[k], cond.pruned()


def alice_sample(
    joint: PureState, rng: np.random.Generator, size: int, phase: float = 0.0
) -> dict[BellOutcome, int]:
    """Outcome counts of ``size`` repetitions of the detector-resolved analyzer."""
    after = apply_all(alice_analyzer(phase), joint)
    idx = sample_outcomes(after, _port_effects(), rng, size)
    counts = np.bincount(idx, minlength=len(PORT_OUTCOME) + 1)
    return {o: int(c) for o, c in zip(PORT_OUTCOME.values(), counts)}


def polarizer_sample(
    joint: PureState, axis: str, rng: np.random.Generator, size: int, phase: float = 0.0
) -> dict[str, int]:
    """Clicks at D_A+ / D_A- (and absorbed events) with both polarizers at ``axis``."""
    after = apply_all(alice_analyzer(phase), joint)
    for port in ("A+", "A-"):
        after = apply(optics.polarizer(axis, 1, port), after)
    effects = [PureState.basis_state(Mode(1, port, axis)) for port in ("A+", "A-")]
    idx = sample_outcomes(after, effects, rng, size)
    counts = np.bincount(idx, minlength=3)
    return {"A+": int(counts[0]), "A-": int(counts[1]), "absorbed": int(counts[2])}


def port_probabilities(joint: PureState, phase: float = 0.0) -> dict[tuple[str, str], float]:
    """Exact click probability of every (port, polarization) detector."""
    after = apply_all(alice_analyzer(phase), joint)
    probs = outcome_probabilities(after, _port_effects())
    return dict(zip(PORT_OUTCOME, probs.tolist()))


def polarizer_clicks(joint: PureState, axis: str, phase: float = 0.0) -> dict[str, float]:
    """Click probability at D_A+ and D_A- with both polarizers set to ``axis``.

    The remainder ``1 - sum`` is absorbed by the polarizers.
    """
    after = apply_all(alice_analyzer(phase), joint)
    out = {}
    for port in ("A+", "A-"):
        passed, _ = optics.transmit(after, optics.polarizer(axis, 1, port))
        out[port] = sum(
            abs(a) ** 2 for b, a in passed.as_dict().items() if b[0].path == port
        )
    return out


# -- Bob -----------------------------------------------------------------------

def bob_conditional(outcome: BellOutcome, collapsed: PureState) -> PolState:
    """Polarization of Bob's photon after the b2 rotation and the PBS.

    The optics are the same for every outcome; ``outcome`` only labels the
    branch the collapsed state came from.
    """
    if collapsed.photons != (2,):
        raise ShapeError(f"expected Bob's photon alone, got photons {collapsed.photons} ({outcome})")
    out = apply(optics.bob_combiner(2), collapsed)
    v = out.amplitude(Mode(2, "B", "v"))
    h = out.amplitude(Mode(2, "B", "h"))
    if abs(abs(v) ** 2 + abs(h) ** 2 - 1.0) > collapsed.tol:
        raise ShapeError("photon 2 did not leave through the PBS output port")
    return PolState(v, h)


def transfer_matrices(
    phase: float = 0.0, extra: Sequence[UnitaryOp] = ()
) -> dict[BellOutcome, np.ndarray]:
    """Bob's PBS output as a linear map of the input polarization, per outcome.

    The columns are the images of ``|v>`` and ``|h>`` pushed through the
    full element chain and scaled by 2, so without phase error each map is
    unitary and ``K @ pol.vector`` is Bob's normalized branch state.
    """
    out = {o: np.zeros((2, 2), dtype=complex) for o in OUTCOMES}
    analyzer = alice_analyzer(phase, extra)
    combiner = optics.bob_combiner(2)
    for col, pol in enumerate((PolState(1.0, 0.0), PolState(0.0, 1.0))):
        after = apply_all(analyzer, joint_state(pol))
        for (port, p), outcome in PORT_OUTCOME.items():
            cond = apply(combiner, project(after, PureState.basis_state(Mode(1, port, p))))
            out[outcome][:, col] = 2.0 * np.array(
                [cond.amplitude(Mode(2, "B", "v")), cond.amplitude(Mode(2, "B", "h"))]
            )
    return out


def conditional_state(outcome: BellOutcome, prepared: PolState) -> PolState:
    """Closed-form Bob state for each branch."""
    a, b = prepared.alpha, prepared.beta
    return {
        BellOutcome.C_PLUS: PolState(b, a),
        BellOutcome.C_MINUS: PolState(-b, a),
        BellOutcome.D_PLUS: PolState(a, b),
        BellOutcome.D_MINUS: PolState(-a, b),
    }[outcome]


_CORRECTIONS = {
    BellOutcome.D_PLUS: np.eye(2),
    BellOutcome.C_PLUS: np.array([[0.0, 1.0], [1.0, 0.0]]),
    BellOutcome.C_MINUS: np.array([[0.0, 1.0], [-1.0, 0.0]]),
    BellOutcome.D_MINUS: np.diag([-1.0, 1.0]),
}


def corrective_unitary(outcome: BellOutcome, photon: int = 2, path: str = "B") -> UnitaryOp:
    """Real 2x2 correction returning the branch state to alpha|v> + beta|h>."""
    return optics.on_path(_CORRECTIONS[outcome], photon, path)


def verifier_setting(outcome: BellOutcome, spec: PrepSpec) -> VerifierSetting:
    """Analyzer orientation that passes the branch state with certainty.

    Linear preparations return ``theta_b`` in [-90, 90); elliptical ones
    return the QWP angle ``gamma_b`` that maps the branch state onto ``|v>``
    (d outcomes, analyzer at 90) or ``|h>`` (c outcomes, analyzer at 0).
    """
    if spec.gamma is None:
        t = spec.theta
        theta_b = {
            BellOutcome.D_PLUS: t,
            BellOutcome.C_PLUS: 90.0 - t,
            BellOutcome.C_MINUS: 90.0 + t,
            BellOutcome.D_MINUS: -t,
        }[outcome]
        return VerifierSetting(_wrap180(theta_b))
    if spec.theta % 180.0 != 0.0:
        raise ValueError("the gamma_B rule applies to elliptical preparations with theta = 0")
    g = spec.gamma
    return {
        BellOutcome.D_PLUS: VerifierSetting(90.0, g + 90.0),
        BellOutcome.D_MINUS: VerifierSetting(90.0, -g + 90.0),
        BellOutcome.C_PLUS: VerifierSetting(0.0, g),
        BellOutcome.C_MINUS: VerifierSetting(0.0, -g),
    }[outcome]


def _wrap180(angle: float) -> float:
    """Map onto [-90, 90); analyzers cannot tell theta from theta + 180."""
    return (angle + 90.0) % 180.0 - 90.0


def fidelity(prepared: PolState, teleported: PolState) -> float:
    return min(float(abs(np.vdot(prepared.vector, teleported.vector)) ** 2), 1.0)


def bob_marginal(prepared: PolState, setting: VerifierSetting) -> float:
    """Bob's click probability at ``setting`` before hearing Alice's result."""
    return sum(0.25 * setting.transmission(conditional_state(o, prepared)) for o in OUTCOMES)


def teleport(
    spec: PrepSpec, rng: np.random.Generator, active: bool = True, phase: float = 0.0
) -> tuple[BellOutcome, PolState, PolState]:
    """One full run: prepare, measure, and (if ``active``) correct.

    Returns ``(outcome, prepared, bob_state)``.
    """
    joint, prepared = prepare_unknown(spec)
    outcome, collapsed = alice_measure(joint, rng, phase)
    bob = bob_conditional(outcome, collapsed)
    if active:
        bob = bob.transformed(_CORRECTIONS[outcome])
    return outcome, prepared, bob
