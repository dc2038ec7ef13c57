"""Monte Carlo coincidence counts and the estimators built on them.

The ideal fringe comes from the state-vector pipeline (including an optional
path-length phase error on Alice's side); imperfection is then applied at the
fringe level::

    mean(theta_B) = k * [V * f(theta_B) + (1 - V) / 2] + dark

where ``f`` is the ideal conditional transmission (``cos^2`` of the analyzer
offset for linear states), ``k = pairs * eff_alice * eff_bob`` and counts are
Poisson distributed about the mean.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import optics
from .qstate import Mode, PureState, UnitaryOp, apply, apply_all, project
from .teleport import (
    OUTCOMES,
    PORT_OUTCOME,
    BellOutcome,
    PrepSpec,
    VerifierSetting,
    alice_analyzer,
    prepare_unknown,
    verifier_setting,
)

TRINE_DEG = (0.0, 120.0, -120.0)
CLASSICAL_S = 0.75
CSV_COLUMNS = ("state_deg", "gamma_deg", "outcome", "theta_b_deg", "count", "window_s")


class IncompleteDataError(ValueError):
    pass


class UndefinedRatioError(ZeroDivisionError):
    pass


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """Imperfections of a run.

    ``dark_rate`` is in counts per accumulation window, ``phase_drift_std``
    in radians (one draw per analyzer setting) and ``window`` in seconds.
    """

    visibility: float = 1.0
    detector_eff: tuple[float, float] = (1.0, 1.0)
    dark_rate: float = 0.0
    phase_drift_std: float = 0.0
    window: float = 1.0

    def __post_init__(self):
        eff = tuple(float(e) for e in np.broadcast_to(self.detector_eff, (2,)))
        object.__setattr__(self, "detector_eff", eff)
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")
        if not all(0.0 < e <= 1.0 for e in eff):
            raise ValueError("detector efficiencies must lie in (0, 1]")
        if self.dark_rate < 0 or self.phase_drift_std < 0 or self.window <= 0:
            raise ValueError("dark_rate and phase_drift_std must be >= 0, window > 0")

    def scale(self, pairs: float) -> float:
        return pairs * self.detector_eff[0] * self.detector_eff[1]


@dataclass(frozen=True)
class CountRecord:
    outcome: BellOutcome
    theta_b: float
    count: int
    window: float = 1.0
    gamma_b: float | None = None
    state_deg: float = 0.0
    gamma_deg: float | None = None
    expected: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("counts are nonnegative")

    def row(self) -> list:
        return [
            _fmt(self.state_deg),
            "" if self.gamma_deg is None else _fmt(self.gamma_deg),
            self.outcome.value,
            _fmt(self.theta_b),
            str(int(self.count)),
            _fmt(self.window),
        ]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(records: Iterable[CountRecord], fh=None) -> str:
    """Write records with a header row; returns the text when ``fh`` is None."""
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue() if fh is None else ""


def read_csv(fh) -> list[CountRecord]:
    out = []
    for row in csv.DictReader(fh):
        out.append(
            CountRecord(
                outcome=BellOutcome(row["outcome"]),
                theta_b=float(row["theta_b_deg"]),
                count=int(row["count"]),
                window=float(row["window_s"]),
                state_deg=float(row["state_deg"]),
                gamma_deg=float(row["gamma_deg"]) if row["gamma_deg"] else None,
            )
        )
    return out


# -- ideal fringe -------------------------------------------------------------

def _alice_effect(outcome: BellOutcome) -> PureState:
    port, pol = next(k for k, v in PORT_OUTCOME.items() if v is outcome)
    return PureState.basis_state(Mode(1, port, pol))


def bob_output(
    spec: PrepSpec, outcome: BellOutcome, phase: float = 0.0, extra: Sequence[UnitaryOp] = ()
) -> np.ndarray:
    """Unnormalized (v, h) amplitudes at Bob's PBS output given Alice's click.

    The squared norm is the probability of that click (1/4 when ``phase = 0``).
    """
    joint, _ = prepare_unknown(spec)
    after = apply_all(alice_analyzer(phase, extra), joint)
    cond = project(after, _alice_effect(outcome))
    out = apply(optics.bob_combiner(2), cond)
    return np.array([out.amplitude(Mode(2, "B", "v")), out.amplitude(Mode(2, "B", "h"))])


def ideal_fringe(
    spec: PrepSpec,
    outcome: BellOutcome,
    setting: VerifierSetting,
    phase: float = 0.0,
    extra: Sequence[UnitaryOp] = (),
) -> float:
    """Transmission at D_B for ``setting``, scaled so a perfect click rate of 1/4 gives 1."""
    amp = setting.jones() @ bob_output(spec, outcome, phase, extra)
    return float(4.0 * abs(np.vdot(optics.linear_pol(setting.theta_b), amp)) ** 2)


def expected_count(
    spec: PrepSpec,
    outcome: BellOutcome,
    setting: VerifierSetting,
    noise: NoiseModel,
    pairs: float,
    phase: float = 0.0,
    extra: Sequence[UnitaryOp] = (),
) -> float:
    f = ideal_fringe(spec, outcome, setting, phase, extra)
    v = noise.visibility
    return noise.scale(pairs) * (v * f + (1.0 - v) / 2.0) + noise.dark_rate


def simulate_sweep(
    spec: PrepSpec,
    outcome: BellOutcome,
    theta_b_grid: Sequence[float],
    noise: NoiseModel,
    pairs_per_point: int,
    rng: np.random.Generator,
    extra: Sequence[UnitaryOp] = (),
) -> list[CountRecord]:
    """Poisson counts at D_B(theta_B) in coincidence with ``outcome``.

    For elliptical preparations Bob's QWP is set by :func:`verifier_setting`
    before the analyzer is swept. ``extra`` elements act after preparation.
    """
    if pairs_per_point < 1:
        raise ValueError("pairs_per_point must be >= 1")
    gamma_b = verifier_setting(outcome, spec).gamma_b
    records = []
    for theta_b in theta_b_grid:
        phase = rng.normal(0.0, noise.phase_drift_std) if noise.phase_drift_std > 0 else 0.0
        setting = VerifierSetting(float(theta_b), gamma_b)
        mean = expected_count(spec, outcome, setting, noise, pairs_per_point, phase, extra)
        records.append(
            CountRecord(
                outcome=outcome,
                theta_b=float(theta_b),
                count=int(rng.poisson(mean)),
                window=noise.window,
                gamma_b=gamma_b,
                state_deg=spec.theta,
                gamma_deg=spec.gamma,
                expected=mean,
            )
        )
    return records


def cell_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for one cell, derived from the master seed."""
    return np.random.default_rng([int(seed), *keys])


def measure_cell(
    spec: PrepSpec,
    outcome: BellOutcome,
    noise: NoiseModel,
    pairs: int,
    rng: np.random.Generator,
    extra: Sequence[UnitaryOp] = (),
) -> tuple[CountRecord, CountRecord]:
    """Counts at the verifier angle and 90 degrees away from it."""
    par = verifier_setting(outcome, spec)
    recs = simulate_sweep(spec, outcome, [par.theta_b, par.theta_b + 90.0], noise, pairs, rng, extra)
    return recs[0], recs[1]


def simulate_experiment(
    noise: NoiseModel,
    pairs_per_cell: int = 1000,
    seed: int = 0,
    states_deg: Sequence[float] = TRINE_DEG,
) -> dict[tuple[float, BellOutcome], tuple[CountRecord, CountRecord]]:
    """All (state, outcome) cells of the S measurement; each cell has its own stream."""
    cells = {}
    for i, theta in enumerate(states_deg):
        spec = PrepSpec(theta)
        for j, outcome in enumerate(OUTCOMES):
            cells[(theta, outcome)] = measure_cell(spec, outcome, noise, pairs_per_cell, cell_rng(seed, i, j))
    return cells


# -- estimators ------------------------------------------------------------------

def fidelity_from_counts(i_par: int, i_perp: int) -> float:
    if i_par < 0 or i_perp < 0:
        raise ValueError("counts are nonnegative")
    if i_par + i_perp == 0:
        raise UndefinedRatioError("no coincidences: I_par + I_perp = 0")
    return i_par / (i_par + i_perp)


@dataclass(frozen=True)
class SEstimate:
    value: float
    std_err: float
    per_cell: Mapping[tuple[float, BellOutcome], float]
    bound: float = CLASSICAL_S

    @property
    def sigma_violation(self) -> float:
        """Standard deviations by which ``value`` exceeds the classical bound."""
        return (self.value - self.bound) / self.std_err


def estimate_s(
    cells: Mapping[tuple[float, BellOutcome], tuple],
    states_deg: Sequence[float] = TRINE_DEG,
) -> SEstimate:
    """Average I_par / (I_par + I_perp) over states (weight 1/N) and outcomes (1/4).

    ``cells`` values may be integer pairs or :class:`CountRecord` pairs. The
    standard error adds binomial variances of the cells; a cell at 0 or 1 uses
    the add-one-half frequency so its variance stays positive.
    """
    weight = 1.0 / (len(states_deg) * len(OUTCOMES))
    per_cell = {}
    var = 0.0
    for theta in states_deg:
        for outcome in OUTCOMES:
            try:
                par, perp = cells[(theta, outcome)]
            except KeyError:
                raise IncompleteDataError(f"missing cell ({theta}, {outcome})") from None
            par = par.count if isinstance(par, CountRecord) else int(par)
            perp = perp.count if isinstance(perp, CountRecord) else int(perp)
            f = fidelity_from_counts(par, perp)
            n = par + perp
            smooth = (par + 0.5) / (n + 1.0)
            per_cell[(theta, outcome)] = f
            var += weight ** 2 * smooth * (1.0 - smooth) / n
    value = weight * sum(per_cell.values())
    return SEstimate(value, float(np.sqrt(var)), per_cell)


def analytic_s(noise: NoiseModel, pairs: float = 1.0) -> float:
    """Expected per-cell fidelity without phase drift: (k(1+V)/2 + d) / (k + 2d)."""
    k = noise.scale(pairs)
    d = noise.dark_rate
    return (k * (1.0 + noise.visibility) / 2.0 + d) / (k + 2.0 * d)


@dataclass(frozen=True)
class FringeFit:
    """Weighted fit ``I = offset + amp * cos(2 (theta - theta_max))``."""

    offset: float
    amplitude: float
    theta_max: float
    visibility: float
    visibility_err: float
    residuals: np.ndarray = field(repr=False)

    @property
    def i_max(self) -> float:
        return self.offset + self.amplitude

    @property
    def i_min(self) -> float:
        return self.offset - self.amplitude


def _check_coverage(theta: np.ndarray) -> None:
    distinct = np.unique(np.round(theta, 9))
    if len(distinct) < 8:
        raise FitError("need at least 8 distinct analyzer settings")
    step = np.min(np.diff(distinct))
    if distinct[-1] - distinct[0] + step < 180.0 - 1e-9:
        raise FitError("analyzer settings must cover 180 degrees")


_REWEIGHT_STEPS = 6


def fit_fringe(records: Sequence[CountRecord]) -> FringeFit:
    theta = np.array([r.theta_b for r in records], dtype=float)
    y = np.array([r.count for r in records], dtype=float)
    _check_coverage(theta)
    t = np.radians(2.0 * theta)
    x = np.stack([np.ones_like(t), np.cos(t), np.sin(t)], axis=1)
    # Poisson weights from the current model, not the data: weighting by the
    # observed counts biases the visibility low when minima sit near zero.
    w = 1.0 / np.maximum(y, 1.0)
    for _ in range(_REWEIGHT_STEPS):
        xtw = x.T * w
        try:
            cov = np.linalg.inv(xtw @ x)
        except np.linalg.LinAlgError as exc:
            raise FitError("singular fringe design matrix") from exc
        coef = cov @ (xtw @ y)
        w = 1.0 / np.maximum(x @ coef, 0.5)
    a, b, c = coef
    if a <= 0:
        raise FitError("fitted mean count is not positive")
    r = float(np.hypot(b, c))
    vis = r / a
    if r > 0:
        grad = np.array([-vis / a, b / (r * a), c / (r * a)])
    else:
        grad = np.array([0.0, 1.0 / a, 0.0])
    err = float(np.sqrt(grad @ cov @ grad))
    theta_max = (np.degrees(np.arctan2(c, b)) / 2.0 + 90.0) % 180.0 - 90.0
    return FringeFit(float(a), r, float(theta_max), vis, err, y - x @ np.array([a, b, c]))


def visibility_of(records: Sequence[CountRecord]) -> float:
    """(I_max - I_min) / (I_max + I_min) of the fitted fringe."""
    return fit_fringe(records).visibility


def angle_distance(a: float, b: float, period: float = 180.0) -> float:
    """Distance between two analyzer angles modulo ``period``."""
    d = (a - b) % period
    return min(d, period - d)
