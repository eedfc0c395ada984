import pytest

from core.models import ModelParams


@pytest.fixture
def example_two() -> ModelParams:
    return ModelParams(inefficiencies=(1.0, 3.0))


@pytest.fixture
def example_three() -> ModelParams:
    return ModelParams.symmetric(1.0, 3)
