import numpy as np
import pytest

from core.choice_set import ChoiceSet
from core.elimination import closed_form_limit, closed_form_limit_three, iterate
from core.exceptions import PreconditionError
from core.models import Grid, ModelParams
from services.oracle_service import OracleService
from services.verification_service import default_compare_steps
from utils.config import ORACLE_ELIMINATION_M_THREE


def test_grid_shares_match_the_solver(example_two):
    grid = Grid.with_default_eps(100)
    shares = OracleService.grid_shares(0, [0.8], example_two, grid)
    assert shares.shape == (101,)
    assert shares[20] == pytest.approx(2 / 3, abs=1e-12)


def test_grid_best_response_respects_the_restriction(example_two):
    grid = Grid(m=1000, eps_opt=1e-5)
    restricted = OracleService.grid_best_response(
        0, [0.9], example_two, grid, restrict_to=ChoiceSet.interval(0.1, 0.5)
    )
    assert restricted.tolist() == pytest.approx([0.5])
    empty = OracleService.grid_best_response(
        0, [0.9], example_two, grid, restrict_to=ChoiceSet()
    )
    assert empty.size == 0


@pytest.mark.parametrize(
    "firm, opponents",
    [(2, [0.5]), (0, [0.5, 0.5]), (0, [1.5])],
)
def test_grid_shares_preconditions(example_two, firm, opponents):
    with pytest.raises(PreconditionError):
        OracleService.grid_shares(firm, opponents, example_two, Grid.with_default_eps(100))


def test_two_firm_grid_elimination_tracks_the_analytic_trace(example_two):
    grid = Grid.with_default_eps(200)
    grid_trace = OracleService.grid_eliminate(example_two, 2, grid)
    assert grid_trace.kind == "grid"
    assert grid_trace.grid_m == 200
    assert grid_trace.converged
    assert grid_trace.counterexamples >= 0

    comparison = OracleService.compare_traces(iterate(example_two), grid_trace, grid)
    assert comparison.passed, comparison
    assert grid_trace.rounds[1].sets[0].hausdorff(ChoiceSet.interval(0.2, 0.8)) <= 2 * grid.step


def test_three_firm_grid_elimination_tracks_the_analytic_trace(example_three):
    grid = Grid.with_default_eps(120)
    grid_trace = OracleService.grid_eliminate(example_three, 3, grid)
    assert grid_trace.converged
    assert all(s.is_symmetric(1e-12) for r in grid_trace.rounds for s in r.sets)

    comparison = OracleService.compare_traces(
        iterate(example_three), grid_trace, grid, steps=default_compare_steps(example_three)
    )
    assert comparison.passed, comparison
    assert grid_trace.limit[0].hausdorff(ChoiceSet.interval(2 / 7, 5 / 7)) <= 2 * grid.step + grid.eps_opt


def test_grid_elimination_is_deterministic_across_workers(monkeypatch, example_two):
    monkeypatch.setattr("services.oracle_service.ORACLE_CHUNK_ROWS", 997)
    grid = Grid.with_default_eps(150)
    single = OracleService.grid_eliminate(example_two, 2, grid, workers=1)
    pooled = OracleService.grid_eliminate(example_two, 2, grid, workers=4)
    assert single.rounds == pooled.rounds
    assert single.counterexamples == pooled.counterexamples


def test_halving_eps_while_doubling_m_keeps_the_limit(example_two):
    coarse = Grid(m=100, eps_opt=1e-4)
    fine = Grid(m=200, eps_opt=5e-5)
    coarse_trace = OracleService.grid_eliminate(example_two, 2, coarse)
    fine_trace = OracleService.grid_eliminate(example_two, 2, fine)
    gap = max(c.hausdorff(f) for c, f in zip(coarse_trace.limit, fine_trace.limit))
    assert gap <= 2 * coarse.step


def test_identical_traces_compare_to_zero(example_two):
    grid = Grid.with_default_eps(100)
    grid_trace = OracleService.grid_eliminate(example_two, 2, grid)
    comparison = OracleService.compare_traces(grid_trace, grid_trace, grid)
    assert comparison.round_gaps == (0.0,) * len(grid_trace.rounds)
    assert comparison.limit_gap == 0.0
    assert comparison.passed


def test_compare_traces_rejects_mismatched_inputs(example_two):
    grid = Grid.with_default_eps(100)
    grid_trace = OracleService.grid_eliminate(example_two, 2, grid)
    with pytest.raises(PreconditionError):
        OracleService.compare_traces(iterate(ModelParams(inefficiencies=(1.0, 2.0))), grid_trace, grid)
    with pytest.raises(PreconditionError):
        OracleService.compare_traces(iterate(example_two), grid_trace, Grid.with_default_eps(120))


def test_compare_traces_flags_distant_rounds(example_two):
    grid = Grid.with_default_eps(100)
    analytic = iterate(example_two)
    grid_trace = OracleService.grid_eliminate(example_two, 2, grid)
    comparison = OracleService.compare_traces(analytic, grid_trace, grid, steps=1e-6, limit_steps=1e-6)
    assert comparison.limit_gap > comparison.limit_threshold
    assert not comparison.passed


def test_grid_elimination_preconditions(example_two, example_three):
    with pytest.raises(PreconditionError):
        OracleService.grid_eliminate(example_two, 2, Grid.with_default_eps(50))
    with pytest.raises(PreconditionError):
        OracleService.grid_eliminate(example_two, 3, Grid.with_default_eps(100))
    with pytest.raises(PreconditionError):
        OracleService.grid_eliminate(ModelParams(inefficiencies=(1.0, 2.0, 3.0)), 3, Grid.with_default_eps(100))
    with pytest.raises(PreconditionError):
        OracleService.grid_eliminate(ModelParams.symmetric(1.0, 4), 4, Grid.with_default_eps(100))


@pytest.mark.slow
def test_two_firm_grid_elimination_at_full_resolution(example_two):
    grid = Grid.with_default_eps(1000)
    grid_trace = OracleService.grid_eliminate(example_two, 2, grid, workers=4)
    comparison = OracleService.compare_traces(iterate(example_two), grid_trace, grid)
    assert comparison.passed, comparison
    assert np.isclose(grid_trace.limit[0].lo, 1 / 3, atol=2 * grid.step)


@pytest.mark.parametrize("inefficiencies", [(1.0, 1.4), (1.0, 1.0)])
def test_two_firm_grid_limit_at_full_resolution(inefficiencies):
    params = ModelParams(inefficiencies=inefficiencies)
    grid = Grid.with_default_eps(1000)
    grid_trace = OracleService.grid_eliminate(params, 2, grid, workers=4)
    assert grid_trace.converged
    for grid_limit, expected in zip(grid_trace.limit, closed_form_limit(params)):
        assert grid_limit.hausdorff(expected) <= 2 * grid.step, (grid_limit, expected)


@pytest.mark.slow
@pytest.mark.parametrize("a", [0.5, 2.0])
def test_three_firm_grid_limit_at_default_resolution(a):
    params = ModelParams.symmetric(a, 3)
    grid = Grid.with_default_eps(ORACLE_ELIMINATION_M_THREE)
    grid_trace = OracleService.grid_eliminate(params, 3, grid, workers=4)
    assert grid_trace.converged
    assert grid_trace.limit[0].hausdorff(closed_form_limit_three(a)) <= 2 * grid.step
