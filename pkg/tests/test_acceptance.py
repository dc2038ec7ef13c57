"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line (shown in the terminal summary
and printed when the module is run as a script). Tolerances are pinned here.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from teleportsim.classical import Ensemble, max_t, measure_and_resend, optimize_strategy, s_value, validate_povm
from teleportsim.counts import (
    NoiseModel,
    angle_distance,
    cell_rng,
    estimate_s,
    expected_count,
    fit_fringe,
    simulate_experiment,
    simulate_sweep,
)
from teleportsim.teleport import (
    OUTCOMES,
    BellOutcome,
    PolState,
    PrepSpec,
    VerifierSetting,
    _CORRECTIONS,
    alice_sample,
    bob_marginal,
    decompose,
    joint_state,
    polarizer_sample,
    prepare_unknown,
    recompose,
    transfer_matrices,
    verifier_setting,
)

from conftest import ACCEPTANCE_LINES

IDENTITY_TOL = 1e-12
DECOMP_TOL = 1e-12
SIGMAS = 4.0
TRIALS = 100_000
T_MAX_TOL = 2e-3
S_CEILING = 0.75 + 1e-6
S_FLOOR = 0.749
MR_TOL = 1e-9
POVM_TOL = 1e-9
S_WINDOW = (0.80, 0.86)
ERR_WINDOW = (0.005, 0.02)
MIN_SIGMA = 5.0
GRID_STEP = 2.0
VIS_FIT_ERRORS = 2.0  # 95% band; a 1-sigma band fails one of four fits most of the time
SIGNAL_TOL = 1e-12


def record(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def random_preparations(rng, n):
    """Half linear (random theta), half elliptical (random gamma)."""
    thetas = rng.uniform(-180.0, 180.0, n // 2)
    gammas = rng.uniform(-90.0, 90.0, n - n // 2)
    specs = [PrepSpec(t) for t in thetas] + [PrepSpec(0.0, g) for g in gammas]
    return np.array([s.jones() @ np.array([1.0, 0.0]) for s in specs])


def test_ideal_teleportation_identity():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    pols = random_preparations(rng, 1000)  # (n, 2)
    worst = 0.0
    for outcome, k in transfer_matrices().items():
        corrected = (_CORRECTIONS[outcome] @ k @ pols.T).T
        fid = np.abs(np.sum(pols.conj() * corrected, axis=1)) ** 2
        worst = max(worst, float(np.max(np.abs(fid - 1.0))))
    elapsed = time.perf_counter() - start
    ok = worst <= IDENTITY_TOL and elapsed < 1.0
    record("ideal teleportation identity", ok, f"max |F - 1| = {worst:.2e} over 1000 x 4, {elapsed:.3f} s")
    assert worst <= IDENTITY_TOL
    assert elapsed < 1.0


def test_bell_decomposition():
    rng = np.random.default_rng(2)
    worst_coef = worst_sum = 0.0
    for _ in range(200):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        joint = joint_state(PolState.from_vector(z / np.linalg.norm(z)))
        branches = decompose(joint)
        worst_coef = max(worst_coef, max(abs(abs(c) - 0.5) for c, _ in branches.values()))
        back = recompose(branches)
        worst_sum = max(worst_sum, max(abs(back.amplitude(*e) - a) for e, a in joint.as_dict().items()))
    ok = worst_coef <= DECOMP_TOL and worst_sum <= DECOMP_TOL
    record("four-branch decomposition", ok, f"max ||c| - 1/2| = {worst_coef:.1e}, resum error = {worst_sum:.1e}")
    assert ok


def test_bell_analyzer_chain():
    rng = np.random.default_rng(3)
    joint, _ = prepare_unknown(PrepSpec(22.5))
    sd = np.sqrt(TRIALS * 0.25 * 0.75)
    devs = {}
    for outcome, c in alice_sample(joint, rng, TRIALS).items():
        devs[f"{outcome}"] = (c - TRIALS / 4) / sd
    for axis in ("v", "h"):
        clicks = polarizer_sample(joint, axis, rng, TRIALS)
        for port in ("A+", "A-"):
            devs[f"{port}|{axis}"] = (clicks[port] - TRIALS / 4) / sd
    worst = max(abs(d) for d in devs.values())
    ok = worst < SIGMAS
    record("Bell-analyzer chain", ok, f"max deviation from 1/4 = {worst:.2f} sigma over {len(devs)} cells")
    assert ok


def test_classical_bound():
    start = time.perf_counter()
    trine = Ensemble.trine()
    res = max_t(trine, 128)
    s_all = []
    for outcomes in range(2, 9):
        _, s = optimize_strategy(trine, outcomes, restarts=50, rng=outcomes)
        s_all.append(s)
    mr = [s_value(measure_and_resend(a), trine) for a in np.arange(0.0, 180.0, 5.0)]
    mr_err = max(abs(x - 0.75) for x in mr)
    elapsed = time.perf_counter() - start
    ok = (
        abs(res.t_max - 9 / 8) <= T_MAX_TOL
        and max(s_all) <= S_CEILING
        and max(s_all) >= S_FLOOR
        and mr_err <= MR_TOL
        and elapsed < 30.0
    )
    record(
        "classical bound",
        ok,
        f"maxT = {res.t_max:.6f}, best S = {max(s_all):.12f}, measure-resend err = {mr_err:.1e}, {elapsed:.1f} s",
    )
    assert ok


def test_povm_invariants():
    trine = Ensemble.trine()
    worst_c = worst_mu = 0.0
    emitted = 0
    for outcomes in range(2, 9):
        for seed in range(50):
            strat, _ = optimize_strategy(trine, outcomes, restarts=1, rng=seed)
            d = validate_povm(strat.povm)
            worst_c = max(worst_c, d.completeness_residual)
            worst_mu = max(worst_mu, d.mu_sum_residual)
            emitted += 1
    ok = worst_c <= POVM_TOL and worst_mu <= POVM_TOL
    record("POVM completeness and sum mu = 2", ok, f"{emitted} strategies, residuals {worst_c:.1e} / {worst_mu:.1e}")
    assert ok


def test_headline_number():
    start = time.perf_counter()
    est = estimate_s(simulate_experiment(NoiseModel(visibility=0.662), pairs_per_cell=1000, seed=0))
    elapsed = time.perf_counter() - start
    checks = {
        "S": S_WINDOW[0] <= est.value <= S_WINDOW[1],
        "stdErr": ERR_WINDOW[0] <= est.std_err <= ERR_WINDOW[1],
        "sigma": est.sigma_violation >= MIN_SIGMA,
        "runtime": elapsed < 1.0,
    }
    failed = [k for k, v in checks.items() if not v]
    record(
        "headline number",
        not failed,
        f"S = {est.value:.4f} +- {est.std_err:.4f}, {est.sigma_violation:.1f} sigma, {elapsed:.3f} s"
        + (f" (failing: {', '.join(failed)})" if failed else ""),
    )
    assert S_WINDOW[0] <= est.value <= S_WINDOW[1]
    assert est.sigma_violation >= MIN_SIGMA
    assert elapsed < 1.0
    assert ERR_WINDOW[0] <= est.std_err <= ERR_WINDOW[1]


def test_fringe_maxima():
    spec = PrepSpec(22.5)
    want = {
        BellOutcome.D_PLUS: 22.5,
        BellOutcome.C_PLUS: 67.5,
        BellOutcome.C_MINUS: 112.5,
        BellOutcome.D_MINUS: -22.5,
    }
    grid = np.arange(-90.0, 90.0, GRID_STEP)
    worst_angle = worst_vis = worst_exact = 0.0
    ok = True
    for j, outcome in enumerate(OUTCOMES):
        recs = simulate_sweep(spec, outcome, grid, NoiseModel(), 1000, cell_rng(0, j))
        fit = fit_fringe(recs)
        off = angle_distance(fit.theta_max, want[outcome])
        pull = abs(fit.visibility - 1.0) / fit.visibility_err
        # the noise-free fringe itself must be fully modulated
        t = np.radians(2.0 * grid)
        design = np.stack([np.ones_like(t), np.cos(t), np.sin(t)], axis=1)
        a, b, c = np.linalg.lstsq(design, [r.expected for r in recs], rcond=None)[0]
        exact_vis = np.hypot(b, c) / a
        worst_angle = max(worst_angle, off)
        worst_vis = max(worst_vis, pull)
        worst_exact = max(worst_exact, abs(exact_vis - 1.0))
        ok &= off <= GRID_STEP and pull <= VIS_FIT_ERRORS and abs(exact_vis - 1.0) <= 1e-9
        assert angle_distance(verifier_setting(outcome, spec).theta_b, want[outcome]) < 1e-9
    record(
        "fringe maxima at theta = 22.5",
        ok,
        f"max offset {worst_angle:.2f} deg, |V - 1| <= {worst_vis:.2f} fit errors, noise-free |V - 1| = {worst_exact:.1e}",
    )
    assert ok


def test_elliptical_extinction():
    spec = PrepSpec(0.0, 20.0)
    noise = NoiseModel(dark_rate=5.0)
    worst_leak = worst_excess = 0.0
    k = transfer_matrices()
    pol = spec.state()
    for outcome in OUTCOMES:
        setting = verifier_setting(outcome, spec)
        out = setting.jones() @ k[outcome] @ pol.vector
        # d branches end in |v>, c branches in |h>
        leak = abs(out[1] if outcome.value.startswith("d") else out[0]) ** 2
        worst_leak = max(worst_leak, leak)
        perp = expected_count(spec, outcome, setting.rotated(90.0), noise, 1000)
        worst_excess = max(worst_excess, abs(perp - noise.dark_rate))
    ok = worst_leak <= 1e-24 and worst_excess <= 1e-9
    record("elliptical extinction at gamma = 20", ok, f"leak {worst_leak:.1e}, orthogonal minus dark {worst_excess:.1e}")
    assert ok


def test_no_signalling():
    rng = np.random.default_rng(5)
    k = transfer_matrices()
    worst = 0.0
    pols = random_preparations(rng, 200)
    for vec in pols:
        pol = PolState.from_vector(vec)
        for _ in range(10):
            setting = VerifierSetting(rng.uniform(-90, 90), rng.choice([None, rng.uniform(-90, 90)]))
            # physical chain: each branch has weight 1/4
            p = sum(0.25 * setting.transmission(PolState.from_vector(k[o] @ vec)) for o in OUTCOMES)
            worst = max(worst, abs(p - 0.5), abs(bob_marginal(pol, setting) - 0.5))
    ok = worst <= SIGNAL_TOL
    record("no-signalling", ok, f"max |P(click) - 1/2| = {worst:.1e} over 2000 (state, analyzer) pairs")
    assert ok


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
