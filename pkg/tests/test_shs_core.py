"""Tests for the generic stationary/age-balance solver.

The age machinery is checked against a hand-buildable model first: a
single source whose fresh update preempts the one in service. Its time
average age has the known value 1/lambda + 1/mu, and a bespoke
brute-force simulation (independent of everything in the package)
confirms that number before the solver is trusted to reproduce it.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibage import (NegativeFixedPoint, NonErgodic, RateParams, RateSymbol, ResetMap,
                    ShsModel, SingularSystem, Transition, average_age, build_model,
                    solve_age_balance, stationary_distribution, validate_model)
from fibage.models import COMMIT, FRESH, RCU_PREEMPTIVE, RWL_PREEMPTIVE
from fibage.shs import IDENTITY


def two_state_single_source() -> ShsModel:
    """States {0: idle, 1: busy}; arrivals preempt, completions commit."""
    return ShsModel(name="single-source", num_states=2, transitions=(
        Transition(id=1, src=0, dst=1, rate_symbol=RateSymbol.LAMBDA, reset_app=FRESH),
        Transition(id=2, src=1, dst=1, rate_symbol=RateSymbol.LAMBDA, reset_app=FRESH),
        Transition(id=3, src=1, dst=0, rate_symbol=RateSymbol.MU, reset_app=COMMIT),
    ))


def brute_force_single_source_age(lam: float, mu: float, horizon: float,
                                  seed: int) -> float:
    """Direct event-by-event simulation of the two-state model."""
    rng = np.random.default_rng(seed)
    t = 0.0
    payload_ts = 0.0
    delivered_ts = 0.0
    t_arrival = rng.exponential(1.0 / lam)
    t_done = math.inf
    area = 0.0
    while True:
        te = min(t_arrival, t_done, horizon)
        area += (te - t) * ((t - delivered_ts) + (te - delivered_ts)) * 0.5
        t = te
        if t >= horizon:
            return area / horizon
        if t == t_arrival:
            payload_ts = t
            t_done = t + rng.exponential(1.0 / mu)
            t_arrival = t + rng.exponential(1.0 / lam)
        else:
            delivered_ts = payload_ts
            t_done = math.inf


def params_for(lam: float, mu: float) -> RateParams:
    # the two-state model never fires lambda_hat / mu_hat; any positive
    # value keeps RateParams happy without affecting the solution
    return RateParams(lambda_hat=1.0, lam=lam, mu_hat=1.0, mu=mu)


def test_two_state_stationary_distribution():
    # birth-death chain 0 <-> 1 with rates a=2 (up), b=3 (down)
    model = ShsModel(name="birth-death", num_states=2, transitions=(
        Transition(id=1, src=0, dst=1, rate_symbol=RateSymbol.LAMBDA),
        Transition(id=2, src=1, dst=0, rate_symbol=RateSymbol.MU),
    ))
    pi = stationary_distribution(model, params_for(2.0, 3.0))
    assert pi.pi == pytest.approx([0.6, 0.4], abs=1e-14)
    assert pi.residual < 1e-12


@pytest.mark.parametrize("lam,mu", [(1.0, 1.0), (2.0, 3.0), (0.5, 4.0)])
def test_single_source_age_matches_oracle_then_solver(lam, mu):
    expected = 1.0 / lam + 1.0 / mu
    simulated = brute_force_single_source_age(lam, mu, horizon=4e5, seed=2024)
    assert simulated == pytest.approx(expected, rel=0.02)

    model = two_state_single_source()
    params = params_for(lam, mu)
    pi = stationary_distribution(model, params)
    solution = solve_age_balance(model, params, pi, "app")
    assert solution.average_age == pytest.approx(expected, rel=1e-12)
    assert average_age(solution) == solution.average_age


def test_average_age_is_sum_of_second_components():
    from fibage import AgeBalanceSolution

    model = two_state_single_source()
    params = params_for(1.0, 1.0)
    solution = solve_age_balance(model, params, stationary_distribution(model, params), "app")
    assert average_age(solution) == pytest.approx(solution.v_bar[:, 1].sum())
    # definition spot checks on raw vectors
    fake = AgeBalanceSolution(process="app",
                              v_bar=np.array([[0.0, 1.0], [0.0, 2.0], [0.0, 3.0],
                                              [0.0, 4.0], [0.0, 5.0]]),
                              average_age=15.0)
    assert average_age(fake) == 15.0
    single = AgeBalanceSolution(process="app", v_bar=np.array([[0.5, 2.5]]),
                                average_age=2.5)
    assert average_age(single) == 2.5


def test_location_stream_of_single_source_model_untouched():
    # every reset_loc is the identity, so the location ages diverge:
    # nothing ever resets them and the balance system is singular
    model = two_state_single_source()
    params = params_for(1.0, 1.0)
    pi = stationary_distribution(model, params)
    with pytest.raises(SingularSystem):
        solve_age_balance(model, params, pi, "location")


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(min_value=0.01, max_value=100.0),
       rho=st.floats(min_value=0.001, max_value=0.1),
       beta=st.floats(min_value=0.1, max_value=20.0),
       sigma=st.floats(min_value=0.5, max_value=20.0))
def test_rate_scaling_symmetry(scale, rho, beta, sigma):
    model = build_model(RCU_PREEMPTIVE)
    params = RateParams.from_normalized(rho, beta, sigma)
    pi = stationary_distribution(model, params)
    scaled = params.scaled(scale)
    pi_scaled = stationary_distribution(model, scaled)
    assert np.max(np.abs(pi.pi - pi_scaled.pi)) < 1e-12

    v = solve_age_balance(model, params, pi, "app")
    v_scaled = solve_age_balance(model, scaled, pi_scaled, "app")
    assert v_scaled.average_age * scale == pytest.approx(v.average_age, rel=1e-9)
    assert np.allclose(v_scaled.v_bar * scale, v.v_bar, rtol=1e-9, atol=0.0)


@pytest.mark.parametrize("kind", [RCU_PREEMPTIVE, RWL_PREEMPTIVE])
def test_identity_self_loop_changes_nothing(kind):
    model = build_model(kind)
    params = RateParams.from_normalized(0.05, 3.0, 4.0)
    augmented = ShsModel(
        name=model.name + "+loop", num_states=model.num_states,
        transitions=model.transitions + (
            Transition(id=99, src=3, dst=3, rate_symbol=RateSymbol.MU_HAT),))

    pi = stationary_distribution(model, params)
    pi_aug = stationary_distribution(augmented, params)
    assert np.max(np.abs(pi.pi - pi_aug.pi)) < 1e-12
    for process in ("location", "app"):
        v = solve_age_balance(model, params, pi, process)
        v_aug = solve_age_balance(augmented, params, pi_aug, process)
        assert np.max(np.abs(v.v_bar - v_aug.v_bar)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(rho=st.floats(min_value=0.001, max_value=0.1),
       beta=st.floats(min_value=0.1, max_value=20.0),
       sigma=st.floats(min_value=0.5, max_value=20.0))
def test_solution_invariants_on_random_parameters(rho, beta, sigma):
    params = RateParams.from_normalized(rho, beta, sigma)
    for kind in (RCU_PREEMPTIVE, RWL_PREEMPTIVE):
        model = build_model(kind)
        pi = stationary_distribution(model, params)
        assert pi.pi.min() >= 0.0
        assert abs(pi.pi.sum() - 1.0) <= 1e-12
        assert pi.residual < 1e-10
        for process in ("location", "app"):
            sol = solve_age_balance(model, params, pi, process)
            assert sol.residual < 1e-10 * (1.0 + np.max(np.abs(sol.v_bar)))
            assert sol.v_bar.min() >= -1e-9
            assert sol.average_age > 0.0


def test_disconnected_chain_is_non_ergodic():
    model = ShsModel(name="disconnected", num_states=3, transitions=(
        Transition(id=1, src=0, dst=1, rate_symbol=RateSymbol.LAMBDA),
        Transition(id=2, src=1, dst=0, rate_symbol=RateSymbol.MU),
        # state 2 only reachable, never leaves
        Transition(id=3, src=0, dst=2, rate_symbol=RateSymbol.LAMBDA_HAT),
    ))
    with pytest.raises(NonErgodic):
        stationary_distribution(model, params_for(1.0, 1.0))


def test_unresettable_age_is_reported_singular():
    # one state whose only transition is an identity self-loop: the age
    # grows forever and the fixed-point system has no solution
    model = ShsModel(name="loop-only", num_states=1, transitions=(
        Transition(id=1, src=0, dst=0, rate_symbol=RateSymbol.LAMBDA),))
    params = params_for(1.0, 1.0)
    pi = stationary_distribution(model, params)
    with pytest.raises(SingularSystem):
        solve_age_balance(model, params, pi, "app")


def test_negative_fixed_point_detected():
    # a stationary vector that does not belong to (model, params) is the
    # documented way to land outside the non-negative cone; the solver
    # must flag it instead of clamping
    from fibage import StationaryDistribution

    model = two_state_single_source()
    params = params_for(1.0, 1.0)
    bogus = StationaryDistribution(pi=np.array([-5.0, 6.0]), residual=0.0)
    with pytest.raises(NegativeFixedPoint):
        solve_age_balance(model, params, bogus, "app")


def test_validate_model_accepts_shipped_models():
    for kind in (RCU_PREEMPTIVE, RWL_PREEMPTIVE):
        assert validate_model(build_model(kind)) == []


def test_validate_model_flags_double_reset():
    model = ShsModel(name="double-reset", num_states=2, transitions=(
        Transition(id=1, src=0, dst=1, rate_symbol=RateSymbol.LAMBDA,
                   reset_app=FRESH, reset_loc=COMMIT),
        Transition(id=2, src=1, dst=0, rate_symbol=RateSymbol.MU),
    ))
    diagnostics = validate_model(model)
    assert len(diagnostics) == 1
    assert "transition 1" in diagnostics[0]
    assert "both" in diagnostics[0]


def test_validate_model_flags_unreachable_state():
    model = ShsModel(name="island", num_states=3, transitions=(
        Transition(id=1, src=0, dst=1, rate_symbol=RateSymbol.LAMBDA),
        Transition(id=2, src=1, dst=0, rate_symbol=RateSymbol.MU),
    ))
    assert any("strongly connected" in d for d in validate_model(model))


def test_validate_model_flags_non_binary_map_and_duplicate_id():
    model = ShsModel(name="junk", num_states=2, transitions=(
        Transition(id=7, src=0, dst=1, rate_symbol=RateSymbol.LAMBDA,
                   reset_app=ResetMap(((2, 0), (0, 1)))),
        Transition(id=7, src=1, dst=0, rate_symbol=RateSymbol.MU),
    ))
    diagnostics = validate_model(model)
    assert any("non-binary" in d for d in diagnostics)
    assert any("duplicate" in d for d in diagnostics)


def test_reset_map_apply_and_identity():
    assert IDENTITY.apply((3.0, 4.0)) == (3.0, 4.0)
    assert FRESH.apply((3.0, 4.0)) == (0.0, 4.0)
    assert COMMIT.apply((3.0, 4.0)) == (3.0, 3.0)
    assert IDENTITY.is_identity and not FRESH.is_identity
    assert FRESH.as_bit_string() == "0001"
    assert COMMIT.as_bit_string() == "1100"
