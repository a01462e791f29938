import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from tracelab.algebra import make_algebra
from tracelab.harness import random_algebra, random_element

settings.register_profile(
    "tracelab", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("tracelab")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rng_for(seed):
    return np.random.default_rng(seed)


def random_setup(seed, n=1, dims=(1, 4), blocks=3):
    """An algebra plus ``n`` Gaussian elements, all from one seed."""
    rng = rng_for(seed)
    alg = random_algebra(rng, dims, blocks)
    return alg, [random_element(alg, rng) for _ in range(n)]


@pytest.fixture
def scalar():
    return make_algebra([(1, 1.0)])


def scalars(alg, *values):
    return [alg.element([np.array([[v]], dtype=complex)]) for v in values]
