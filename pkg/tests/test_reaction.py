import numpy as np
import pytest

from core.choice_set import ChoiceSet
from core.exceptions import PreconditionError
from core.market import solve_cuts, solve_shares_batch
from core.models import BeliefRegion, Grid, LocationProfile, ModelParams
from core.reaction import (
    classify_belief_three,
    greatest_optimal_choice_three,
    normalize_belief,
    reaction_firm1_two,
    reaction_firm2_two,
    reaction_symmetric_two,
    reaction_three,
    reaction_three_symmetric,
    reaction_two,
    region_boundaries_three,
    smallest_optimal_choice_three,
)
from services.oracle_service import OracleService


def _reduced_beliefs(r_lo: float, r_hi: float, count: int):
    for c_r in np.linspace(r_lo, r_hi, count):
        c_r = float(c_r)
        for c_l in np.linspace(1.0 - c_r, c_r, count):
            yield min(max(float(c_l), 1.0 - c_r), c_r), c_r


# ---- two firms ----------------------------------------------------------

@pytest.mark.parametrize("c2, expected", [(0.1, 0.22), (0.5, 0.5), (0.9, 0.78)])
def test_firm1_reaction_branches(example_two, c2, expected):
    assert reaction_firm1_two(c2, example_two).points == pytest.approx((expected,), abs=1e-12)


@pytest.mark.parametrize("c1, expected", [(0.2, (0.64,)), (0.8, (0.36,)), (0.5, (0.3, 0.7))])
def test_firm2_reaction_correspondence(example_two, c1, expected):
    assert reaction_firm2_two(c1, example_two).points == pytest.approx(expected, abs=1e-12)


def test_symmetric_two_firm_reaction():
    assert reaction_symmetric_two(0.2, 1.0).points == pytest.approx((0.4,), abs=1e-12)


def test_reaction_two_follows_input_orientation():
    swapped = ModelParams(inefficiencies=(3.0, 1.0))
    assert reaction_two(1, 0.9, swapped).points == pytest.approx((0.78,), abs=1e-12)
    assert reaction_two(0, 0.2, swapped).points == pytest.approx((0.64,), abs=1e-12)
    assert reaction_two(0, 0.2, ModelParams.symmetric(1.0, 2)).points == pytest.approx((0.4,), abs=1e-12)


def test_asymmetric_routines_need_ordered_inefficiencies():
    with pytest.raises(PreconditionError):
        reaction_firm1_two(0.5, ModelParams(inefficiencies=(3.0, 1.0)))
    with pytest.raises(PreconditionError):
        reaction_firm2_two(1.5, ModelParams(inefficiencies=(1.0, 3.0)))
    with pytest.raises(PreconditionError):
        reaction_two(2, 0.5, ModelParams(inefficiencies=(1.0, 3.0)))


@pytest.mark.parametrize("firm, c_other, response", [(1, 0.2, 0.64), (0, 0.9, 0.78)])
def test_response_sits_at_the_cut(example_two, firm, c_other, response):
    locations = (response, c_other) if firm == 0 else (c_other, response)
    outcome = solve_cuts(LocationProfile(locations=locations), example_two)
    assert outcome.cuts[1] == pytest.approx(response, abs=1e-12)


def test_two_firm_responses_match_the_grid(example_two):
    grid = Grid(m=1000, eps_opt=1e-5)
    points = OracleService.grid_best_response(0, [0.9], example_two, grid)
    assert np.abs(points - 0.78).max() <= grid.step

    points = OracleService.grid_best_response(1, [0.5], example_two, grid)
    found = ChoiceSet.points(points.tolist(), merge_tol=1.5 * grid.step)
    assert found.hausdorff(ChoiceSet.points([0.3, 0.7])) <= grid.step


# ---- three symmetric firms ----------------------------------------------

def test_normalize_belief():
    belief, mirrored = normalize_belief(0.9, 0.1)
    assert (belief.c_l, belief.c_r, mirrored) == (0.1, 0.9, False)

    belief, mirrored = normalize_belief(0.1, 0.3)
    assert mirrored
    assert (belief.c_l, belief.c_r) == pytest.approx((0.7, 0.9), abs=1e-15)

    belief, mirrored = normalize_belief(0.3, 0.7)
    assert (belief.c_l, belief.c_r, mirrored) == (0.3, 0.7, False)


def test_belief_region_rejects_points_outside_the_reduced_domain():
    with pytest.raises(ValueError):
        BeliefRegion(c_l=0.1, c_r=0.3)
    with pytest.raises(ValueError):
        BeliefRegion(c_l=0.8, c_r=0.7)


def test_plateau_response_at_the_case_boundary():
    response = reaction_three(1 / 3, 1.0, 1.0)
    assert response.kind == "interval"
    assert response.interval == pytest.approx((1 / 3, 5 / 6), abs=1e-12)
    assert classify_belief_three(BeliefRegion(c_l=1 / 3, c_r=1.0), 1.0) == (4, 7)


def test_corner_belief_of_the_limit_interval():
    response = reaction_three(2 / 7, 5 / 7, 1.0)
    assert response.kind == "interval"
    assert response.lo == pytest.approx(2 / 7, abs=1e-12)
    assert response.hi == pytest.approx(5 / 7, abs=1e-12)


def test_plateau_extends_below_the_limit_for_extreme_beliefs():
    response = reaction_three(0.0, 1.0, 1.0)
    assert response.interval == pytest.approx((0.2, 0.8), abs=1e-12)


def test_beliefs_on_the_mirror_line_have_both_responses():
    assert classify_belief_three(BeliefRegion(c_l=0.5, c_r=0.5), 1.0) == (5,)
    assert reaction_three(0.5, 0.5, 1.0).points == pytest.approx((0.4, 0.6), abs=1e-12)


def test_three_firm_responses_match_the_grid(example_three):
    grid = Grid(m=1000, eps_opt=1e-6)
    points = OracleService.grid_best_response(0, [0.5, 0.5], example_three, grid)
    found = ChoiceSet.points(points.tolist(), merge_tol=1.5 * grid.step)
    assert found.hausdorff(ChoiceSet.points([0.4, 0.6])) <= grid.step

    plateau = Grid(m=1000, eps_opt=1e-9)
    points = OracleService.grid_best_response(0, [0.2, 0.9], example_three, plateau)
    found = ChoiceSet.points(points.tolist(), merge_tol=1.5 * plateau.step)
    assert found.hausdorff(reaction_three(0.2, 0.9, 1.0).as_choice_set()) <= plateau.step


@pytest.mark.parametrize(
    "belief, response",
    [((0.5, 0.5), 0.4), ((6 / 7, 1.0), 4 / 7), ((0.69, 0.72), 0.47)],
)
def test_point_responses_sit_at_the_first_cut(belief, response):
    assert reaction_three_symmetric(BeliefRegion(c_l=belief[0], c_r=belief[1]), 1.0).lo == pytest.approx(
        response, abs=1e-12
    )
    outcome = solve_cuts(LocationProfile(locations=(response,) + belief), ModelParams.symmetric(1.0, 3))
    assert outcome.cuts[1] == pytest.approx(response, abs=1e-9)


def test_region_four_shares_are_constant(example_three):
    response = reaction_three(0.2, 0.9, 1.0)
    assert response.interval == pytest.approx((0.27, 0.78), abs=1e-12)
    positions = np.linspace(0.27, 0.78, 11)
    locations = np.column_stack((positions, np.full(11, 0.2), np.full(11, 0.9)))
    shares = solve_shares_batch(locations, example_three.inefficiencies)[1][:, 0]
    assert shares == pytest.approx(np.full(11, 0.34), abs=1e-9)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_every_reduced_belief_has_exactly_one_response(a):
    for c_l, c_r in _reduced_beliefs(0.5, 1.0, 101):
        belief = BeliefRegion(c_l=c_l, c_r=c_r)
        assert classify_belief_three(belief, a), (c_l, c_r)
        response = reaction_three_symmetric(belief, a)
        if response.kind == "points":
            assert len(response.points) == 1, (c_l, c_r, response)


def test_mirror_covariance():
    rng = np.random.default_rng(7)
    for c_l, c_r in rng.uniform(0.0, 1.0, size=(300, 2)):
        direct = reaction_three(float(c_l), float(c_r), 1.0).mirror()
        reflected = reaction_three(1.0 - float(c_r), 1.0 - float(c_l), 1.0)
        assert direct.kind == reflected.kind
        assert direct.values() == pytest.approx(reflected.values(), abs=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_smallest_optimal_choice_over_limit_beliefs(a):
    bounds = region_boundaries_three(a)
    lowest = min(
        reaction_three(c_l, c_r, a).lo
        for c_l, c_r in _reduced_beliefs(0.5, bounds.r_plateau, 61)
    )
    assert lowest == pytest.approx(smallest_optimal_choice_three(a), abs=1e-12)
    assert smallest_optimal_choice_three(a) == pytest.approx((1 + a) / (4 + 3 * a))


@pytest.mark.parametrize("a, u", [(1.0, 1.0), (1.0, 5 / 7), (2.0, 0.9)])
def test_greatest_optimal_choice(a, u):
    expected = (3 + 2 * a) * (a + u) / (3 * (1 + a) ** 2)
    assert greatest_optimal_choice_three(u, a) == pytest.approx(expected, abs=1e-12)


def test_greatest_optimal_choice_needs_a_plateau():
    with pytest.raises(PreconditionError):
        greatest_optimal_choice_three(0.6, 1.0)


def test_locating_left_beats_locating_right(example_three):
    rng = np.random.default_rng(11)
    grid = Grid.with_default_eps(400)
    for _ in range(20):
        c_r = float(rng.uniform(0.5, 1.0))
        c_l = float(rng.uniform(1.0 - c_r, c_r))
        shares = OracleService.grid_shares(0, [c_l, c_r], example_three, grid)
        left = shares[grid.points < c_l]
        right = shares[grid.points > c_r]
        if left.size and right.size:
            assert left.max() >= right.max() - 2 * grid.step


def test_left_cut_moves_right_with_the_middle_firm(example_three):
    positions = np.linspace(0.31, 0.9, 60)
    locations = np.column_stack((positions, np.full(60, 0.3), np.full(60, 0.9)))
    cuts = solve_shares_batch(locations, example_three.inefficiencies)[0][:, 1]
    below = cuts <= positions + 1e-12
    both = below[:-1] & below[1:]
    assert both.any()
    assert np.all(np.diff(cuts)[both] >= -1e-12)


# ---- analytic responses against the grid optimum ------------------------

def _draw_two_firm(rng):
    a1 = float(rng.uniform(0.1, 5.0))
    return ModelParams(inefficiencies=(a1, a1 + float(rng.uniform(0.1, 5.0))))


def _firm1_case(rng, i):
    params = _draw_two_firm(rng)
    c2 = float(rng.uniform(0.0, 1.0))
    return params, 0, [c2], reaction_firm1_two(c2, params)


def _firm2_case(rng, i):
    params = _draw_two_firm(rng)
    c1 = float(rng.uniform(0.0, 1.0))
    return params, 1, [c1], reaction_firm2_two(c1, params)


def _symmetric_two_case(rng, i):
    a = float(rng.uniform(0.1, 10.0))
    cj = float(rng.uniform(0.0, 1.0))
    return ModelParams.symmetric(a, 2), 0, [cj], reaction_symmetric_two(cj, a)


def _three_case(rng, i):
    a = (0.5, 1.0, 2.0)[i % 3]
    c_l, c_r = (float(c) for c in rng.uniform(0.0, 1.0, size=2))
    return ModelParams.symmetric(a, 3), 0, [c_l, c_r], reaction_three(c_l, c_r, a)


@pytest.mark.parametrize(
    "draw, seed",
    [(_firm1_case, 21), (_firm2_case, 22), (_symmetric_two_case, 23), (_three_case, 24)],
)
def test_analytic_responses_reach_the_grid_optimum(draw, seed):
    rng = np.random.default_rng(seed)
    grid = Grid.with_default_eps(10_000)
    for i in range(200):
        params, firm, opponents, response = draw(rng, i)
        if response.kind == "points":
            candidates = list(response.points)
        else:
            candidates = list(np.linspace(response.lo, response.hi, 5))

        rows = []
        for c in candidates:
            others = iter(opponents)
            rows.append([c if j == firm else next(others) for j in range(params.n)])
        cuts, shares, _ = solve_shares_batch(np.array(rows), params.inefficiencies)

        best_on_grid = OracleService.grid_shares(firm, opponents, params, grid).max()
        assert best_on_grid - shares[:, firm].min() <= 2 / 10_000, (params, opponents, response)

        if response.kind == "points":
            for row, c in enumerate(candidates):
                if c < min(opponents) - 1e-9:
                    assert abs(c - cuts[row, 1]) <= 1e-9, (params, opponents, c)
                elif c > max(opponents) + 1e-9:
                    assert abs(c - cuts[row, -2]) <= 1e-9, (params, opponents, c)


def test_region_four_plateaus_for_random_beliefs():
    rng = np.random.default_rng(31)
    checked = 0
    for _ in range(20_000):
        if checked == 100:
            break
        a = float(rng.uniform(0.1, 10.0))
        c_r = float(rng.uniform(0.5, 1.0))
        c_l = float(rng.uniform(1.0 - c_r, c_r))
        belief = BeliefRegion(c_l=c_l, c_r=c_r)
        if 4 not in classify_belief_three(belief, a):
            continue
        response = reaction_three_symmetric(belief, a)
        if response.kind != "interval":
            continue
        lo, hi = response.interval
        if hi - lo < 1e-6 or lo - c_l < 1e-9 or c_r - hi < 1e-9:
            continue

        positions = np.linspace(lo, hi, 10)
        locations = np.column_stack((positions, np.full(10, c_l), np.full(10, c_r)))
        cuts, shares, _ = solve_shares_batch(locations, (a, a, a))
        assert np.ptp(shares[:, 0]) <= 1e-9, (a, c_l, c_r)
        assert abs(cuts[0, 1] - lo) <= 1e-9, (a, c_l, c_r)
        assert abs(cuts[-1, 2] - hi) <= 1e-9, (a, c_l, c_r)
        checked += 1
    assert checked == 100
