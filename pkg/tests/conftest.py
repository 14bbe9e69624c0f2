import numpy as np
import pytest

from fgnfilter.model import FilterGain, WeightSpec, random_system


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_instance(rng, horizon=None, hursts=(0.5, 0.55, 0.7, 0.85), gain_box=2.0):
    n = int(rng.integers(1, 9)) if horizon is None else horizon
    system = random_system(rng, n, hursts=hursts)
    gain = FilterGain(rng.uniform(-gain_box, gain_box, n))
    weights = WeightSpec(rng.uniform(0.0, 1.0, n + 1) + np.r_[0.0, np.full(n, 1e-3)])
    return system, gain, weights


@pytest.fixture
def instance(rng):
    return random_instance(rng, horizon=5)
