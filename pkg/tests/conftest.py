# tests/conftest.py
import os

import pytest
from hypothesis import HealthCheck, Verbosity, settings

from highway.graphcore import build_metric
from models.data_models import HdConfig
from utils.fixtures import complete_exp, def19_star, grid, spider, star, three_cluster

settings.register_profile("ci", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=100, deadline=None)
settings.register_profile("debugger", max_examples=10, deadline=None, verbosity=Verbosity.verbose)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture
def cfg5():
    return HdConfig(5.0, 0.5, seed=0)


@pytest.fixture
def star_metric():
    return build_metric(star(6))


@pytest.fixture
def grid_metric():
    return build_metric(grid(3, 3))


@pytest.fixture
def spider_metric():
    return build_metric(spider(8, 5.0))


@pytest.fixture
def def19_metric():
    return build_metric(def19_star(4, 0.05))


@pytest.fixture
def complete_exp_metric():
    return build_metric(complete_exp(5, 5.0))


@pytest.fixture
def three_cluster_metric():
    return build_metric(three_cluster(4))
