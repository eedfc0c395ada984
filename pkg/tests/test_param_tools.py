import pytest

from core.exceptions import PreconditionError, UsageError
from tools.param_tools import ParamsExtractor


def test_fractions_round_to_the_nearest_float():
    assert ParamsExtractor.parse_number("1/3") == 1 / 3
    assert ParamsExtractor.parse_number(" 0.25 ") == 0.25
    assert ParamsExtractor.parse_number_list("1,1/2,") == (1.0, 0.5)


@pytest.mark.parametrize("text", ["abc", "1/0", ""])
def test_bad_numbers(text):
    with pytest.raises(UsageError):
        ParamsExtractor.parse_number(text)


def test_pair_lists():
    assert ParamsExtractor.parse_pair_list("1:3,1:2") == ((1.0, 3.0), (1.0, 2.0))
    with pytest.raises(UsageError):
        ParamsExtractor.parse_pair_list("1:2:3")
    with pytest.raises(UsageError):
        ParamsExtractor.parse_pair_list(",")


def test_single_inefficiency_means_symmetric_firms():
    assert ParamsExtractor.build_params((2.0,), 3).inefficiencies == (2.0, 2.0, 2.0)
    assert ParamsExtractor.build_params((1.0, 3.0), 2).inefficiencies == (1.0, 3.0)


def test_parameter_preconditions():
    with pytest.raises(PreconditionError):
        ParamsExtractor.build_params((1.0, 2.0), 3)
    with pytest.raises(PreconditionError):
        ParamsExtractor.build_params((0.0,), 2)
    with pytest.raises(PreconditionError):
        ParamsExtractor.build_profile((0.2, 1.4), 2)
    with pytest.raises(PreconditionError):
        ParamsExtractor.build_profile((0.2,), 2)
