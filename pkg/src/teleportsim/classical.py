"""Classical (measure-and-prepare) teleportation and its fidelity bound.

Alice measures the unknown polarization state with a rank-one POVM
``{|e_l><e_l|}``, sends ``l`` and Bob prepares ``|phi_l>``. Averaged over an
ensemble, the pass probability of a projective test onto the original state
is

    S = sum_{a,l} p_a |<phi_a|phi_l>|^2 |<phi_a|e_l>|^2.

Writing ``e_l = sqrt(mu_l) |Omega_l>`` factors this as
``S = sum_l (1/N) mu_l T_l`` with ``sum_l mu_l = 2``, so
``S <= (2/N) max T``; for the trine (N = 3) ``max T = 9/8`` and ``S <= 3/4``.

Two independent routes are provided: :func:`max_t` is a brute-force grid
search over pairs of Bloch-sphere states, and :func:`optimize_strategy` is a
projected gradient ascent over POVMs. They share no code beyond the overlap
formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .optics import linear_pol
from .teleport import PolState

POVM_TOL = 1e-9


class InvalidPovmError(ValueError):
    def __init__(self, diagnostics: PovmDiagnostics):
        super().__init__(
            f"invalid POVM: completeness residual {diagnostics.completeness_residual:.3g}, "
            f"sum(mu) - 2 = {diagnostics.mu_sum_residual:.3g}"
        )
        self.diagnostics = diagnostics


def _vectors(states) -> np.ndarray:
    rows = [s.vector if isinstance(s, PolState) else np.asarray(s, dtype=complex) for s in states]
    return np.array(rows, dtype=complex).reshape(-1, 2)


def _complex_pairs(arr: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def _from_pairs(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Prepared states (rows of a (N, 2) array in the (v, h) basis) with probabilities."""

    states: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        states = _vectors(self.states)
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if len(states) != len(probs) or len(states) == 0:
            raise ValueError("need one probability per state")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        norms = np.linalg.norm(states, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("ensemble states must be normalized")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def trine(cls) -> Ensemble:
        return cls.linear([0.0, 120.0, -120.0])

    @classmethod
    def linear(cls, angles: Sequence[float], probs: Sequence[float] | None = None) -> Ensemble:
        states = [linear_pol(t) for t in angles]
        if probs is None:
            probs = np.full(len(states), 1.0 / len(states))
        return cls(np.array(states), probs)

    @property
    def size(self) -> int:
        return len(self.probs)

    @property
    def weights(self) -> np.ndarray:
        """``N p_a``: per-state weights inside T (all ones for a uniform ensemble)."""
        return self.size * self.probs

    def to_dict(self) -> dict:
        return {"states": _complex_pairs(self.states), "probs": self.probs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> Ensemble:
        if "angles_deg" in d:
            return cls.linear(d["angles_deg"], d.get("probs"))
        return cls(_from_pairs(d["states"]), d["probs"])


@dataclass(frozen=True)
class PovmDiagnostics:
    completeness_residual: float
    mu_sum_residual: float
    mu: tuple[float, ...]

    @property
    def valid(self) -> bool:
        return self.completeness_residual < POVM_TOL and abs(self.mu_sum_residual) < POVM_TOL


@dataclass(frozen=True, eq=False)
class Povm:
    """Rank-one POVM given by unnormalized effect vectors (rows)."""

    effects: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "effects", _vectors(self.effects))

    @property
    def mu(self) -> np.ndarray:
        return np.sum(np.abs(self.effects) ** 2, axis=1)

    @property
    def omegas(self) -> np.ndarray:
        """Normalized effect directions; zero effects map to zero rows."""
        mu = self.mu
        out = np.zeros_like(self.effects)
        nz = mu > 0
        out[nz] = self.effects[nz] / np.sqrt(mu[nz])[:, None]
        return out

    def operator_sum(self) -> np.ndarray:
        e = self.effects
        return e.T @ e.conj()


def validate_povm(povm: Povm) -> PovmDiagnostics:
    """Completeness and trace diagnostics; never raises."""
    resid = np.linalg.norm(povm.operator_sum() - np.eye(2), ord=2)
    mu = povm.mu
    return PovmDiagnostics(float(resid), float(mu.sum() - 2.0), tuple(mu.tolist()))


@dataclass(frozen=True, eq=False)
class ClassicalStrategy:
    povm: Povm
    resend: np.ndarray

    def __post_init__(self):
        resend = _vectors(self.resend)
        if len(resend) != len(self.povm.effects):
            raise ValueError("need one resend state per POVM outcome")
        if np.any(np.abs(np.linalg.norm(resend, axis=1) - 1.0) > 1e-12):
            raise ValueError("resend states must be normalized")
        object.__setattr__(self, "resend", resend)

    @property
    def outcomes(self) -> int:
        return len(self.resend)

    def to_dict(self) -> dict:
        return {
            "effects": _complex_pairs(self.povm.effects),
            "resend": _complex_pairs(self.resend),
        }

    @classmethod
    def from_dict(cls, d: dict) -> ClassicalStrategy:
        return cls(Povm(_from_pairs(d["effects"])), _from_pairs(d["resend"]))


def measure_and_resend(angle: float) -> ClassicalStrategy:
    """Measure in the linear basis at ``angle`` and resend the basis state found."""
    basis = np.array([linear_pol(angle), linear_pol(angle + 90.0)])
    return ClassicalStrategy(Povm(basis), basis)


def _overlaps(states: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """``|<state_a|vec_j>|^2`` as an (N, J) array."""
    return np.abs(states.conj() @ vecs.T) ** 2


def s_value(strategy: ClassicalStrategy, ensemble: Ensemble) -> float:
    diag = validate_povm(strategy.povm)
    if not diag.valid:
        raise InvalidPovmError(diag)
    test = _overlaps(ensemble.states, strategy.resend)
    click = _overlaps(ensemble.states, strategy.povm.effects)
    return float(ensemble.probs @ np.sum(test * click, axis=1))


def t_value(phi_c, omega, ensemble: Ensemble) -> float:
    """sum_a N p_a |<phi_a|phi_c>|^2 |<phi_a|omega>|^2 for normalized ``phi_c``, ``omega``."""
    pc, om = _vectors([phi_c])[0], _vectors([omega])[0]
    for v in (pc, om):
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("t_value needs normalized states")
    x = _overlaps(ensemble.states, pc[None, :])[:, 0]
    y = _overlaps(ensemble.states, om[None, :])[:, 0]
    return float(np.sum(ensemble.weights * x * y))


def s_from_t(strategy: ClassicalStrategy, ensemble: Ensemble) -> float:
    """S assembled as sum_l (1/N) mu_l T_l."""
    mu = strategy.povm.mu
    omegas = strategy.povm.omegas
    return float(
        sum(
            m / ensemble.size * t_value(r, o, ensemble)
            for m, r, o in zip(mu, strategy.resend, omegas)
            if m > 0
        )
    )


# -- brute-force oracle ----------------------------------------------------------

def bloch_grid(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Pure states on a (polar x azimuth) grid, ``resolution`` points per axis.

    The poles appear once each, so the grid holds
    ``(resolution - 2) * resolution + 2`` distinct states.

    Returns ``(states, angles)`` where ``angles[k] = (polar, azimuth)`` and
    ``states[k] = cos(polar/2)|v> + exp(i azimuth) sin(polar/2)|h>``.
    """
    polar = np.linspace(0.0, np.pi, resolution)
    azim = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
    P, A = np.meshgrid(polar[1:-1], azim, indexing="ij")
    # each pole is one state whatever the azimuth
    P = np.concatenate([[0.0], P.ravel(), [np.pi]])
    A = np.concatenate([[0.0], A.ravel(), [0.0]])
    states = np.stack([np.cos(P / 2), np.exp(1j * A) * np.sin(P / 2)], axis=1)
    return states, np.stack([P, A], axis=1)


@dataclass(frozen=True, eq=False)
class MaxTResult:
    t_max: float
    phi_c: np.ndarray
    omega: np.ndarray
    argmax: np.ndarray = field(repr=False)
    """All grid maximizers as a (k, 2, 2) array of (phi_c, omega) pairs."""


def max_t(ensemble: Ensemble, resolution: int = 128, atol: float = 1e-12, chunk: int = 256) -> MaxTResult:
    """Exhaustive maximum of T over a grid of (phi_c, omega) pairs.

    Every grid pair is evaluated; all pairs within ``atol`` of the maximum
    are reported since the maximizer is generally not unique.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64 points per axis")
    grid, _ = bloch_grid(resolution)
    fid = _overlaps(ensemble.states, grid)  # (N, G)
    left = (fid * ensemble.weights[:, None]).T  # (G, N)
    best = -np.inf
    hits: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    for start in range(0, len(grid), chunk):
        block = left[start:start + chunk] @ fid  # (chunk, G)
        top = float(block.max())
        if top < best - atol:
            continue
        best = max(best, top)
        i, j = np.nonzero(block >= best - atol)
        hits.append((i + start, j, block[i, j]))
    rows = np.concatenate([h[0] for h in hits])
    cols = np.concatenate([h[1] for h in hits])
    vals = np.concatenate([h[2] for h in hits])
    keep = vals >= best - atol
    pairs = np.stack([grid[rows[keep]], grid[cols[keep]]], axis=1)
    k = int(np.argmax(vals))
    return MaxTResult(best, grid[rows[k]], grid[cols[k]], pairs)


# -- optimizer -------------------------------------------------------------------

def repair(effects: np.ndarray) -> np.ndarray:
    """Map arbitrary effect vectors onto a valid POVM: e_l -> M^(-1/2) e_l."""
    m = effects.T @ effects.conj()
    w, v = np.linalg.eigh(m)
    if w.min() <= 1e-14 * max(w.max(), 1.0):
        raise np.linalg.LinAlgError("effects do not span the state space")
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    return effects @ inv_sqrt.T


def best_resend(effects: np.ndarray, ensemble: Ensemble) -> tuple[np.ndarray, float]:
    """Optimal Bob states for fixed effects and the resulting S.

    For outcome ``l`` Bob should send the top eigenvector of
    ``B_l = sum_a p_a |<phi_a|e_l>|^2 |phi_a><phi_a|``.
    """
    click = _overlaps(ensemble.states, effects)  # (N, L)
    proj = np.einsum("ai,aj->aij", ensemble.states, ensemble.states.conj())
    b = np.einsum("a,al,aij->lij", ensemble.probs, click, proj)
    w, v = np.linalg.eigh(b)
    return v[:, :, -1], float(w[:, -1].sum())


def _ascent_direction(effects: np.ndarray, resend: np.ndarray, ensemble: Ensemble) -> np.ndarray:
    # dS/d(conj e_l) = A_l e_l with A_l = sum_a p_a |<phi_a|r_l>|^2 |phi_a><phi_a|
    test = _overlaps(ensemble.states, resend)
    proj = np.einsum("ai,aj->aij", ensemble.states, ensemble.states.conj())
    a = np.einsum("a,al,aij->lij", ensemble.probs, test, proj)
    return np.einsum("lij,lj->li", a, effects)


def _local_search(
    effects: np.ndarray, ensemble: Ensemble, max_iter: int, tol: float
) -> tuple[np.ndarray, np.ndarray, float]:
    effects = repair(effects)
    resend, s = best_resend(effects, ensemble)
    step = 1.0
    for _ in range(max_iter):
        grad = _ascent_direction(effects, resend, ensemble)
        improved = False
        while step > 1e-10:
            try:
                trial = repair(effects + step * grad)
            except np.linalg.LinAlgError:
                step *= 0.5
                continue
            trial_resend, trial_s = best_resend(trial, ensemble)
            if trial_s > s:
                gain = trial_s - s
                effects, resend, s = trial, trial_resend, trial_s
                step *= 1.5
                improved = True
                break
            step *= 0.5
        if not improved or gain < tol:
            break
    return effects, resend, s


def optimize_strategy(
    ensemble: Ensemble,
    outcomes: int = 2,
    restarts: int = 50,
    rng: np.random.Generator | int | None = None,
    max_iter: int = 2000,
    tol: float = 1e-13,
) -> tuple[ClassicalStrategy, float]:
    """Best classical strategy found by projected ascent from random starts.

    The result depends only on ``(ensemble, outcomes, seed)``: each restart
    draws from its own child generator.
    """
    if not 2 <= outcomes <= 8:
        raise ValueError("outcomes must be between 2 and 8")
    if restarts < 1:
        raise ValueError("need at least one restart")
    if isinstance(rng, np.random.Generator):
        rng = int(rng.integers(2**63))
    seq = np.random.SeedSequence(rng)
    best: tuple[np.ndarray, np.ndarray, float] | None = None
    for child in seq.spawn(restarts):
        g = np.random.default_rng(child)
        start = g.normal(size=(outcomes, 2)) + 1j * g.normal(size=(outcomes, 2))
        try:
            found = _local_search(start, ensemble, max_iter, tol)
        except np.linalg.LinAlgError:
            continue
        if best is None or found[2] > best[2]:
            best = found
    if best is None:
        raise RuntimeError("every restart started from a degenerate POVM")
    effects, resend, _ = best
    strategy = ClassicalStrategy(Povm(effects), resend)
    return strategy, s_value(strategy, ensemble)


def classical_bound(ensemble: Ensemble, t_max: float) -> float:
    """Upper bound on S implied by ``t_max`` and sum(mu) = 2."""
    return 2.0 * t_max / ensemble.size
