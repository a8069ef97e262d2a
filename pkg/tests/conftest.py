import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ltpi", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ltpi")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def ar1_series():
    from ltpi.dgp import SCENARIOS, gen_scenario, make_rng

    return gen_scenario(SCENARIOS["short-light"], 260, make_rng(7))
