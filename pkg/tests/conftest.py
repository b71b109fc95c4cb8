import numpy as np
import pytest

from gridirl import FeatureMap, GridSpec, State, Theta


@pytest.fixture
def spec4() -> GridSpec:
    return GridSpec(width=4, height=4)


@pytest.fixture
def uniform_features4() -> FeatureMap:
    return FeatureMap(np.ones((1, 4, 4)))


@pytest.fixture
def theta1() -> Theta:
    return Theta(np.array([-1.0]))


@pytest.fixture
def corridor3() -> GridSpec:
    """Three cells in a row; goal at the right end in most tests."""
    return GridSpec(width=3, height=1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def random_feature_map(rng, shape, k=2, low=0.2, high=1.0) -> FeatureMap:
    return FeatureMap(rng.uniform(low, high, size=(k,) + shape))
