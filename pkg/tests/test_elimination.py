import math

import numpy as np
import pytest

from core.choice_set import ChoiceSet
from core.elimination import (
    closed_form_limit,
    closed_form_limit_three,
    iterate,
    iterate_symmetric_two,
    iterate_two_firm,
    pure_nash_two,
    round_three_symmetric,
    round_two_firm,
)
from core.exceptions import InvariantViolation, PreconditionError
from core.models import ModelParams, ThreeFirmRoundState, TwoFirmRoundState
from services.sweep_service import SweepService
from services.verification_service import contraction_factor


def _assert_set(actual: ChoiceSet, expected, tol: float = 1e-12):
    assert actual.hausdorff(ChoiceSet.from_intervals(expected)) <= tol, actual


# ---- two asymmetric firms -----------------------------------------------

def test_two_firm_rounds(example_two):
    trace = iterate(example_two)
    first, second, third = trace.rounds[1], trace.rounds[2], trace.rounds[3]

    _assert_set(first.sets[0], [(0.2, 0.8)])
    _assert_set(first.sets[1], [(0.3, 0.4), (0.6, 0.7)])
    _assert_set(second.sets[1], [(0.3, 0.36), (0.64, 0.7)])
    _assert_set(third.sets[1], [(0.32, 0.34), (0.66, 0.68)])
    assert third.sets[0] == second.sets[1]

    assert first.rules == ("image", "two-sided")
    assert second.rules == ("copy", "two-sided")
    assert third.rules == ("copy", "split")


def test_two_firm_limit(example_two):
    trace = iterate(example_two)
    assert trace.kind == "two-firm"
    assert trace.converged
    assert trace.converged_at <= 200
    for limit in trace.limit:
        _assert_set(limit, [(1 / 3, 1 / 3), (2 / 3, 2 / 3)], 1e-8)
    assert trace.is_monotone(1e-12)
    assert trace.limit_within_rounds(1e-12)


def test_two_firm_trace_follows_input_orientation(example_two):
    trace = iterate(ModelParams(inefficiencies=(3.0, 1.0)))
    _assert_set(trace.rounds[1].sets[1], [(0.2, 0.8)])
    _assert_set(trace.rounds[1].sets[0], [(0.3, 0.4), (0.6, 0.7)])
    assert trace.rounds[1].rules == ("two-sided", "image")
    assert trace.inefficiencies == (3.0, 1.0)


def test_copy_rule_reuses_the_opponent_set(example_two):
    trace = iterate(example_two)
    copies = 0
    for previous, current in zip(trace.rounds, trace.rounds[1:]):
        if current.rules[0] == "copy":
            copies += 1
            assert current.sets[0] == previous.sets[1]
    assert copies > 0


def _random_pair(rng, regime: int):
    # a_2 - a_1 below 1/2, between 1/2 and 1, above 1
    if regime == 0:
        a1 = float(rng.uniform(0.1, 9.5))
        return a1, a1 + float(rng.uniform(0.01, 0.5))
    if regime == 1:
        a1 = float(rng.uniform(0.1, 9.0))
        return a1, a1 + float(rng.uniform(0.5, 1.0))
    a1 = float(rng.uniform(0.1, 8.9))
    return a1, a1 + float(rng.uniform(1.0, 10.0 - a1))


def test_limits_match_closed_form_for_random_pairs():
    rng = np.random.default_rng(3)
    for i in range(50):
        a1, a2 = _random_pair(rng, i % 3)
        params = ModelParams(inefficiencies=(a1, a2))
        trace = iterate(params)
        assert trace.converged, (a1, a2)
        for limit, expected in zip(trace.limit, closed_form_limit(params)):
            assert limit.hausdorff(expected) <= 1e-6, (a1, a2, limit)


def test_two_firm_round_rejects_asymmetric_states(example_two):
    state = TwoFirmRoundState(p1=ChoiceSet.interval(0.1, 0.3))
    with pytest.raises(InvariantViolation):
        round_two_firm(state, example_two)


def test_two_firm_routines_need_distinct_inefficiencies():
    with pytest.raises(PreconditionError):
        iterate_two_firm(ModelParams.symmetric(1.0, 2))


# ---- two symmetric firms ------------------------------------------------

@pytest.mark.parametrize("a", [0.1, 1.0, 10.0])
def test_symmetric_two_firms_converge_to_the_centre(a):
    trace = iterate_symmetric_two(a)
    assert trace.kind == "symmetric-two"
    assert trace.converged
    _assert_set(trace.rounds[1].sets[0], [(a / (1 + 2 * a), (1 + a) / (1 + 2 * a))])
    for limit in trace.limit:
        _assert_set(limit, [(0.5, 0.5)], 1e-9)


# ---- three symmetric firms ----------------------------------------------

def test_three_firm_rounds(example_three):
    trace = iterate(example_three)
    assert trace.kind == "three-symmetric"
    _assert_set(trace.rounds[1].sets[0], [(1 / 6, 5 / 6)])
    _assert_set(trace.rounds[2].sets[0], [(17 / 72, 55 / 72)])
    assert trace.rounds[2].rules == ("recurrence",) * 3
    assert trace.converged
    for limit in trace.limit:
        _assert_set(limit, [(2 / 7, 5 / 7)], 1e-8)


@pytest.mark.parametrize("a", [0.01, 0.5, 1.0, 2.0, 10.0, 100.0])
def test_three_firm_limit_matches_closed_form(a):
    trace = iterate(ModelParams.symmetric(a, 3), tol=1e-10)
    assert trace.converged
    assert trace.limit[0].hausdorff(closed_form_limit_three(a)) <= 1e-9


def test_three_firm_limit_narrows_as_inefficiency_grows():
    values = [0.01, 0.5, 1.0, 2.0, 10.0, 100.0]
    limits = [iterate(ModelParams.symmetric(a, 3), tol=1e-10).limit[0] for a in values]
    lows = [limit.lo for limit in limits]
    highs = [limit.hi for limit in limits]
    assert all(b > a for a, b in zip(lows, lows[1:]))
    assert all(b < a for a, b in zip(highs, highs[1:]))
    assert (lows[0], highs[0]) == pytest.approx((0.25, 0.75), abs=1e-3)
    assert (lows[-1], highs[-1]) == pytest.approx((1 / 3, 2 / 3), abs=2e-3)


def test_three_firm_gaps_decay_geometrically(example_three):
    trace = iterate(example_three)
    rho = contraction_factor(example_three)
    gaps = trace.hausdorff_gaps[:10]
    for previous, current in zip(gaps, gaps[1:]):
        assert current / previous == pytest.approx(rho, abs=1e-9)


def test_three_firm_round_rejects_states_below_the_fixed_point():
    with pytest.raises(PreconditionError):
        round_three_symmetric(ThreeFirmRoundState(k=1, u_k=0.6), 1.0)


# ---- dispatch and limits ------------------------------------------------

def test_round_cap_reports_non_convergence(example_two):
    trace = iterate(example_two, max_rounds=2)
    assert not trace.converged
    assert trace.converged_at is None
    assert len(trace.rounds) == 3
    assert len(trace.hausdorff_gaps) == 2


@pytest.mark.parametrize(
    "params",
    [
        ModelParams.symmetric(1.0, 4),
        ModelParams(inefficiencies=(1.0, 2.0, 3.0)),
    ],
)
def test_iterate_preconditions(params):
    with pytest.raises(PreconditionError):
        iterate(params)


@pytest.mark.parametrize("tol, max_rounds", [(0.0, 10), (1e-9, 0)])
def test_iteration_arguments(example_two, tol, max_rounds):
    with pytest.raises(PreconditionError):
        iterate(example_two, tol, max_rounds)


def test_closed_form_limits(example_two, example_three):
    _assert_set(closed_form_limit(example_two)[1], [(1 / 3, 1 / 3), (2 / 3, 2 / 3)])
    _assert_set(closed_form_limit(ModelParams.symmetric(2.0, 2))[0], [(0.5, 0.5)])
    _assert_set(closed_form_limit(example_three)[2], [(2 / 7, 5 / 7)])
    with pytest.raises(PreconditionError):
        closed_form_limit(ModelParams.symmetric(1.0, 4))


def test_sweep_limits_keeps_input_order():
    rows = SweepService.sweep_limits([
        ModelParams(inefficiencies=(1.0, 3.0)),
        ModelParams(inefficiencies=(1.0, 2.0)),
        ModelParams.symmetric(1.0, 3),
        ModelParams.symmetric(2.0, 3),
    ])
    assert [row["index"] for row in rows] == [0, 1, 2, 3]
    assert all(row["converged"] and row["gap"] <= 1e-6 for row in rows)
    assert rows[0]["limit_lo"] == pytest.approx(1 / 3, abs=1e-8)
    assert rows[1]["limit_hi"] == pytest.approx(0.6, abs=1e-8)
    # points move to the centre as a_2 - a_1 shrinks; the interval shrinks as a grows
    assert rows[1]["limit_hi"] < rows[0]["limit_hi"]
    assert rows[3]["limit_hi"] - rows[3]["limit_lo"] < rows[2]["limit_hi"] - rows[2]["limit_lo"]


# ---- pure Nash ----------------------------------------------------------

@pytest.mark.parametrize("inefficiencies", [(1.0, 3.0), (3.0, 1.0), (1.0, 1.1)])
def test_no_pure_nash_for_asymmetric_firms(inefficiencies):
    result = pure_nash_two(ModelParams(inefficiencies=inefficiencies), scan_n=2001)
    assert result.equilibrium is None
    assert result.min_gap > 1e-6


def test_pure_nash_for_symmetric_firms():
    result = pure_nash_two(ModelParams.symmetric(1.0, 2), scan_n=2001)
    assert result.equilibrium == pytest.approx((0.5, 0.5), abs=1e-9)
    assert result.min_gap <= 1e-12


def test_pure_nash_preconditions(example_three):
    with pytest.raises(PreconditionError):
        pure_nash_two(example_three)
    with pytest.raises(PreconditionError):
        pure_nash_two(ModelParams.symmetric(1.0, 2), scan_n=1)


@pytest.mark.parametrize("inefficiencies", [(1.0, 3.0), (1.0, 1.1)])
def test_coarse_nash_scan_reports_a_finite_gap(inefficiencies):
    result = pure_nash_two(ModelParams(inefficiencies=inefficiencies), scan_n=2)
    assert result.equilibrium is None
    assert 0.0 < result.min_gap < math.inf
    assert all(math.isfinite(c) for c in result.argmin_profile)


def test_coarse_nash_scan_finds_the_centre():
    result = pure_nash_two(ModelParams.symmetric(1.0, 2), scan_n=2)
    assert result.equilibrium == pytest.approx((0.5, 0.5), abs=1e-9)
    assert result.min_gap <= 1e-12


# ---- round state bookkeeping --------------------------------------------

def test_two_firm_states_expose_the_split_pieces(example_two):
    initial = TwoFirmRoundState()
    assert (initial.l1, initial.l2) == (0.0, 0.0)
    assert not initial.split
    assert initial.split_endpoints is None

    first = round_two_firm(initial, example_two)
    assert first.l1 == pytest.approx(0.2, abs=1e-12)
    assert first.split
    assert first.split_endpoints == pytest.approx((0.3, 0.4, 0.6, 0.7), abs=1e-12)

    third = round_two_firm(round_two_firm(first, example_two), example_two)
    assert third.split_endpoints == pytest.approx((0.32, 0.34, 0.66, 0.68), abs=1e-12)
