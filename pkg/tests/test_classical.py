import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teleportsim.classical import (
    ClassicalStrategy,
    Ensemble,
    InvalidPovmError,
    Povm,
    bloch_grid,
    classical_bound,
    max_t,
    measure_and_resend,
    optimize_strategy,
    repair,
    s_from_t,
    s_value,
    t_value,
    validate_povm,
)
from teleportsim.optics import linear_pol

from conftest import bloch, trine_t_bloch

TRINE = Ensemble.trine()


@pytest.mark.parametrize("angle", np.arange(0.0, 180.0, 5.0))
def test_measure_and_resend_is_three_quarters(angle):
    assert s_value(measure_and_resend(angle), TRINE) == pytest.approx(0.75, abs=1e-9)


def test_fixed_resend_scores_half():
    # ignore the measurement result and always send |h>
    basis = np.array([[1.0, 0.0], [0.0, 1.0]])
    strat = ClassicalStrategy(Povm(basis), np.array([[0.0, 1.0], [0.0, 1.0]]))
    assert s_value(strat, TRINE) == pytest.approx(0.5, abs=1e-12)


def test_invalid_povm_rejected():
    bad = ClassicalStrategy(Povm(np.array([[1.0, 0.0], [1.0, 0.0]])), np.eye(2))
    diag = validate_povm(bad.povm)
    assert not diag.valid
    assert diag.completeness_residual > 0.5
    with pytest.raises(InvalidPovmError):
        s_value(bad, TRINE)


def test_s_equals_mu_weighted_t():
    strat, s = optimize_strategy(TRINE, 3, restarts=3, rng=4)
    assert s_from_t(strat, TRINE) == pytest.approx(s, abs=1e-12)
    strat = measure_and_resend(17.0)
    assert s_from_t(strat, TRINE) == pytest.approx(s_value(strat, TRINE), abs=1e-12)


@given(
    st.floats(0, np.pi), st.floats(0, 2 * np.pi), st.floats(0, np.pi), st.floats(0, 2 * np.pi)
)
@settings(max_examples=80)
def test_t_matches_bloch_oracle(p1, a1, p2, a2):
    r = np.array([np.cos(p1 / 2), np.exp(1j * a1) * np.sin(p1 / 2)])
    o = np.array([np.cos(p2 / 2), np.exp(1j * a2) * np.sin(p2 / 2)])
    assert t_value(r, o, TRINE) == pytest.approx(trine_t_bloch(bloch(r), bloch(o)), abs=1e-12)


def test_orthogonal_in_plane_gives_three_eighths():
    # Bloch vectors antiparallel in the trine plane
    assert t_value(linear_pol(0.0), linear_pol(90.0), TRINE) == pytest.approx(3 / 8, abs=1e-12)
    assert t_value(linear_pol(10.0), linear_pol(10.0), TRINE) == pytest.approx(9 / 8, abs=1e-12)


def test_bloch_grid_size_and_norm():
    states, ang = bloch_grid(64)
    assert len(states) == 62 * 64 + 2
    assert np.allclose(np.linalg.norm(states, axis=1), 1.0)
    assert ang.shape == (len(states), 2)


def test_max_t_trine():
    res = max_t(TRINE, 128)
    assert res.t_max == pytest.approx(9 / 8, abs=2e-3)
    # every reported maximizer attains the max
    for pc, om in res.argmax[:20]:
        assert t_value(pc, om, TRINE) == pytest.approx(res.t_max, abs=1e-12)
    assert len(res.argmax) > 1


def test_max_t_resolution_guard():
    with pytest.raises(ValueError):
        max_t(TRINE, 32)


@pytest.mark.slow
def test_max_t_resolution_convergence():
    assert max_t(TRINE, 128).t_max == pytest.approx(max_t(TRINE, 256).t_max, abs=5e-3)


def test_two_orthogonal_states():
    ens = Ensemble.linear([0.0, 90.0])
    assert max_t(ens, 64).t_max == pytest.approx(1.0, abs=1e-9)
    _, s = optimize_strategy(ens, 2, restarts=5, rng=0)
    assert s == pytest.approx(1.0, abs=1e-9)


def test_single_state_is_perfect():
    ens = Ensemble.linear([33.0])
    _, s = optimize_strategy(ens, 2, restarts=3, rng=0)
    assert s == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("outcomes", [2, 3, 4, 6])
def test_optimizer_respects_bound(outcomes):
    strat, s = optimize_strategy(TRINE, outcomes, restarts=10, rng=outcomes)
    diag = validate_povm(strat.povm)
    assert diag.completeness_residual < 1e-9
    assert diag.mu_sum_residual < 1e-9
    assert 0.749 <= s <= 0.75 + 1e-9


def test_bound_certificate():
    res = max_t(TRINE, 128)
    bound = classical_bound(TRINE, res.t_max)
    assert bound <= 0.75 + 1e-9
    assert bound == pytest.approx(0.75, abs=2e-3)


def test_optimizer_deterministic():
    a, sa = optimize_strategy(TRINE, 3, restarts=4, rng=11)
    b, sb = optimize_strategy(TRINE, 3, restarts=4, rng=11)
    assert sa == sb
    assert np.array_equal(a.resend, b.resend)


def test_optimizer_argument_checks():
    with pytest.raises(ValueError):
        optimize_strategy(TRINE, 1)
    with pytest.raises(ValueError):
        optimize_strategy(TRINE, 2, restarts=0)


def test_repair_yields_povm(rng):
    e = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    diag = validate_povm(Povm(repair(e)))
    assert diag.valid
    assert sum(diag.mu) == pytest.approx(2.0, abs=1e-12)


def test_nonuniform_ensemble():
    ens = Ensemble.linear([0.0, 60.0], [0.8, 0.2])
    strat, s = optimize_strategy(ens, 2, restarts=10, rng=1)
    bound = classical_bound(ens, max_t(ens, 128).t_max)
    assert s <= bound + 1e-3
    assert s > 0.75


def test_ensemble_validation_and_roundtrip():
    with pytest.raises(ValueError):
        Ensemble.linear([0.0, 90.0], [0.5, 0.6])
    with pytest.raises(ValueError):
        Ensemble(np.array([[1.0, 1.0]]), [1.0])
    back = Ensemble.from_dict(TRINE.to_dict())
    assert np.allclose(back.states, TRINE.states)
    strat = measure_and_resend(30.0)
    again = ClassicalStrategy.from_dict(strat.to_dict())
    assert s_value(again, TRINE) == pytest.approx(0.75)
