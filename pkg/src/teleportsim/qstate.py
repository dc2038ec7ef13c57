"""Small dense state-vector engine over labeled optical modes.

States hold at most two photons, each occupying one of a handful of
(path, polarization) modes, so every vector has dimension <= 16. Basis
entries are tuples of :class:`Mode`, one per photon, ordered by photon number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-12


class StateError(ValueError):
    """Base error for malformed states and operators."""


class LabelCollisionError(StateError):
    pass


class DimensionError(StateError):
    pass


class InvariantError(StateError):
    pass


@dataclass(frozen=True, order=True)
class Mode:
    photon: int
    path: str
    pol: str

    def __str__(self) -> str:
        return f"{self.path}{self.photon},{self.pol}"


BasisEntry = tuple[Mode, ...]


def _as_entry(label) -> BasisEntry:
    if isinstance(label, Mode):
        return (label,)
    return tuple(label)


@dataclass(frozen=True, eq=False)
class PureState:
    """Complex amplitudes over an ordered list of basis entries.

    ``normalized=False`` marks post-projection intermediates whose norm is
    allowed to be below one.
    """

    basis: tuple[BasisEntry, ...]
    amps: np.ndarray
    normalized: bool = True
    tol: float = field(default=TOL, repr=False)

    def __post_init__(self):
        basis = tuple(_as_entry(b) for b in self.basis)
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if len(basis) != amps.size:
            raise DimensionError(f"{len(basis)} labels but {amps.size} amplitudes")
        if len(set(basis)) != len(basis):
            raise InvariantError("basis labels are not distinct")
        if not np.all(np.isfinite(amps)):
            raise InvariantError("amplitudes must be finite")
        photons = {tuple(m.photon for m in b) for b in basis}
        if len(photons) > 1:
            raise DimensionError("basis entries disagree on photon content")
        if self.normalized and abs(np.vdot(amps, amps).real - 1.0) > self.tol:
            raise InvariantError(f"state norm {np.linalg.norm(amps):.15g} != 1")
        amps.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_dict(cls, amplitudes: dict, normalized: bool = True) -> PureState:
        return cls(tuple(amplitudes), list(amplitudes.values()), normalized)

    @classmethod
    def basis_state(cls, *modes: Mode) -> PureState:
        return cls((tuple(modes),), [1.0])

    @property
    def photons(self) -> tuple[int, ...]:
        if not self.basis:
            return ()
        return tuple(m.photon for m in self.basis[0])

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def amplitude(self, *modes: Mode) -> complex:
        entry = tuple(modes)
        try:
            return complex(self.amps[self.basis.index(entry)])
        except ValueError:
            return 0j

    def as_dict(self) -> dict[BasisEntry, complex]:
        return {b: complex(a) for b, a in zip(self.basis, self.amps)}

    def renormalized(self) -> PureState:
        n = self.norm
        if n <= self.tol:
            raise InvariantError("cannot renormalize a zero vector")
        return PureState(self.basis, self.amps / n, True, self.tol)

    def pruned(self, atol: float = TOL) -> PureState:
        """Drop basis entries whose amplitude is below ``atol``."""
        keep = np.abs(self.amps) > atol
        return PureState(
            tuple(b for b, k in zip(self.basis, keep) if k),
            self.amps[keep],
            self.normalized,
            self.tol,
        )

    def aligned(self, basis: Sequence[BasisEntry]) -> np.ndarray:
        """Amplitude vector reordered onto ``basis`` (missing entries are 0)."""
        lookup = self.as_dict()
        extra = set(lookup) - set(basis)
        if any(abs(lookup[b]) > self.tol for b in extra):
            raise DimensionError("state has support outside the requested basis")
        return np.array([lookup.get(b, 0j) for b in basis], dtype=complex)

    def __repr__(self) -> str:
        terms = [
            f"({a.real:+.4f}{a.imag:+.4f}j)|{';'.join(map(str, b))}>"
            for b, a in zip(self.basis, self.amps)
            if abs(a) > 1e-15
        ]
        return "PureState(" + " ".join(terms) + ")"


VACUUM = PureState(((),), [1.0])


@dataclass(frozen=True, eq=False)
class UnitaryOp:
    """Linear map on single-photon modes.

    Columns are indexed by ``domain`` and rows by ``codomain``; a beamsplitter
    relabels input paths as output ports, so the two may differ.
    """

    matrix: np.ndarray
    domain: tuple[Mode, ...]
    codomain: tuple[Mode, ...] | None = None
    unitary: bool = True
    tol: float = field(default=TOL, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        domain = tuple(self.domain)
        codomain = domain if self.codomain is None else tuple(self.codomain)
        if m.shape != (len(codomain), len(domain)):
            raise DimensionError(f"matrix shape {m.shape} does not match labels")
        if len(set(domain)) != len(domain) or len(set(codomain)) != len(codomain):
            raise InvariantError("operator labels are not distinct")
        if len({mode.photon for mode in domain + codomain}) != 1:
            raise DimensionError("an operator acts on exactly one photon")
        if self.unitary:
            if m.shape[0] != m.shape[1]:
                raise InvariantError("unitary must be square")
            if not np.allclose(m.conj().T @ m, np.eye(len(domain)), atol=self.tol, rtol=0):
                raise InvariantError("matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)

    @property
    def photon(self) -> int:
        return self.domain[0].photon

    @property
    def dagger(self) -> UnitaryOp:
        return UnitaryOp(self.matrix.conj().T, self.codomain, self.domain, self.unitary, self.tol)

    def then(self, other: UnitaryOp) -> UnitaryOp:
        """Compose: apply ``self`` first, ``other`` second, on the union of modes."""
        if other.photon != self.photon:
            raise DimensionError("cannot compose operators on different photons")
        extra = tuple(m for m in other.domain if m not in self.domain + self.codomain)
        first = _embed(self, self.domain + extra)
        second = _embed(other, first.codomain)
        return UnitaryOp(
            second.matrix @ first.matrix,
            first.domain,
            second.codomain,
            self.unitary and other.unitary,
            self.tol,
        )


def _embed(op: UnitaryOp, modes: Sequence[Mode]) -> UnitaryOp:
    """Extend ``op`` by the identity onto ``modes`` (which must contain its domain)."""
    modes = tuple(modes)
    missing = [m for m in op.domain if m not in modes]
    if missing:
        raise DimensionError(f"operator domain {missing} not among {modes}")
    passive = [m for m in modes if m not in op.domain]
    clash = set(passive) & set(op.codomain)
    if clash:
        raise LabelCollisionError(f"output labels {sorted(clash)} already occupied")
    if len(op.codomain) != len(op.domain):
        raise DimensionError("only square operators can be embedded")
    relabel = dict(zip(op.domain, op.codomain))
    codomain = [relabel.get(m, m) for m in modes]
    big = np.zeros((len(codomain), len(modes)), dtype=complex)
    for j, m in enumerate(modes):
        if m in op.domain:
            col = op.matrix[:, op.domain.index(m)]
            for i, target in enumerate(op.codomain):
                big[codomain.index(target), j] = col[i]
        else:
            big[codomain.index(m), j] = 1.0
    return UnitaryOp(big, modes, tuple(codomain), op.unitary, op.tol)


def tensor(s1: PureState, s2: PureState) -> PureState:
    """Product state, basis entries ordered by photon number."""
    if set(s1.photons) & set(s2.photons):
        raise LabelCollisionError(f"both states contain photon(s) {set(s1.photons) & set(s2.photons)}")
    basis = []
    for b1 in s1.basis:
        for b2 in s2.basis:
            basis.append(tuple(sorted(b1 + b2, key=lambda m: m.photon)))
    amps = np.kron(s1.amps, s2.amps)
    return PureState(tuple(basis), amps, s1.normalized and s2.normalized, min(s1.tol, s2.tol))


def inner(s1: PureState, s2: PureState) -> complex:
    """<s1|s2> with ``s1`` conjugated."""
    if set(s1.basis) != set(s2.basis):
        raise DimensionError("inner product needs identical basis label sets")
    return complex(np.vdot(s1.amps, s2.aligned(s1.basis)))


def overlap(s1: PureState, s2: PureState) -> complex:
    """Like :func:`inner` but tolerant of differing supports (missing amplitudes are zero)."""
    basis = list(s1.basis) + [b for b in s2.basis if b not in s1.basis]
    return complex(np.vdot(s1.aligned(basis), s2.aligned(basis)))


def same_up_to_phase(s1: PureState, s2: PureState, atol: float = TOL) -> bool:
    return abs(abs(overlap(s1, s2)) - s1.norm * s2.norm) <= atol


def apply(u: UnitaryOp, s: PureState) -> PureState:
    """Apply ``u`` to the photon it acts on; modes outside its domain are untouched."""
    photon = u.photon
    if photon not in s.photons:
        raise DimensionError(f"state has no photon {photon}")
    slot = s.photons.index(photon)
    present = sorted({b[slot] for b in s.basis})
    missing = [m for m in u.domain if m not in present]
    modes = tuple(present) + tuple(missing)
    full = _embed(u, modes)
    out: dict[BasisEntry, complex] = {}
    for entry, amp in zip(s.basis, s.amps):
        if amp == 0:
            continue
        col = full.matrix[:, modes.index(entry[slot])]
        for i in np.flatnonzero(col):
            new = entry[:slot] + (full.codomain[i],) + entry[slot + 1:]
            out[new] = out.get(new, 0j) + col[i] * amp
    if not out:
        out = {s.basis[0]: 0j}
    result = PureState(tuple(out), list(out.values()), normalized=False, tol=s.tol)
    if s.normalized and u.unitary:
        if abs(result.norm - 1.0) > s.tol:
            raise InvariantError("norm not preserved by unitary")
        return PureState(result.basis, result.amps, True, s.tol)
    return result


def apply_all(ops: Iterable[UnitaryOp], s: PureState) -> PureState:
    for u in ops:
        s = apply(u, s)
    return s


def single_photon(photon: int, amplitudes: dict[tuple[str, str], complex]) -> PureState:
    """Build a one-photon state from ``{(path, pol): amplitude}``."""
    return PureState.from_dict({(Mode(photon, p, q),): a for (p, q), a in amplitudes.items()})


def project(s: PureState, effect: PureState) -> PureState:
    """Unnormalized state of the other photons after projecting onto ``effect``."""
    photon = effect.photons[0]
    slot = s.photons.index(photon)
    eff = {b[0]: a for b, a in effect.as_dict().items()}
    out: dict[BasisEntry, complex] = {}
    for entry, amp in zip(s.basis, s.amps):
        c = eff.get(entry[slot])
        if c is None:
            continue
        rest = entry[:slot] + entry[slot + 1:]
        out[rest] = out.get(rest, 0j) + np.conj(c) * amp
    if not out:
        rest_photons = s.photons[:slot] + s.photons[slot + 1:]
        if rest_photons:
            raise DimensionError("effect has no support on the measured photon's modes")
        out = {(): 0j}
    return PureState(tuple(out), list(out.values()), normalized=False, tol=s.tol)


def _check_effects(s: PureState, effects: Sequence[PureState]) -> int:
    photons = {e.photons for e in effects}
    if len(photons) != 1 or len(next(iter(photons))) != 1:
        raise DimensionError("effects must be single-photon states of one photon")
    photon = next(iter(photons))[0]
    if photon not in s.photons:
        raise DimensionError(f"state has no photon {photon}")
    modes = sorted({b[0] for e in effects for b in e.basis})
    vecs = np.array([[e.amplitude(m) for m in modes] for e in effects])
    gram = vecs.conj() @ vecs.T
    if not np.allclose(gram, np.eye(len(effects)), atol=s.tol, rtol=0):
        raise InvariantError("measurement effects are not orthonormal")
    return photon


def outcome_probabilities(s: PureState, effects: Sequence[PureState]) -> np.ndarray:
    """Born probabilities of each effect, marginalized over the other photon."""
    _check_effects(s, effects)
    return np.array([project(s, e).norm ** 2 for e in effects])


def project_measure(
    s: PureState,
    effects: Sequence[PureState],
    rng: np.random.Generator,
    complete: bool = True,
) -> tuple[int, PureState, float]:
    """Sample a projective measurement of one photon.

    Returns the outcome index, the renormalized conditional state of the
    remaining photon(s), and the outcome probability. With ``complete`` the
    effects must exhaust the state's support on that photon.
    """
    probs = outcome_probabilities(s, effects)
    total = probs.sum()
    if complete and abs(total - s.norm ** 2) > s.tol:
        raise InvariantError(f"effects do not span the measured subspace (sum p = {total:.15g})")
    if total <= 0:
        raise InvariantError("no outcome has nonzero probability")
    k = int(rng.choice(len(effects), p=probs / total))
    return k, project(s, effects[k]).renormalized(), float(probs[k])


def sample_outcomes(
    s: PureState, effects: Sequence[PureState], rng: np.random.Generator, size: int
) -> np.ndarray:
    """Outcome indices of ``size`` independent repetitions of the same measurement.

    Probabilities are absolute, so for an unnormalized ``s`` (after a
    polarizer) the missing weight ``1 - |s|^2`` is reported as index
    ``len(effects)``.
    """
    probs = outcome_probabilities(s, effects)
    lost = max(0.0, 1.0 - probs.sum())
    p = np.append(probs, lost)
    return rng.choice(len(p), size=size, p=p / p.sum())
