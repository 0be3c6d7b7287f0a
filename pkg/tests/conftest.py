import numpy as np
import pytest

from src.config import configure_solver, configure_tolerances
from src.ensembles import circular_ensemble, cluster_ensemble, hard_instance


@pytest.fixture(autouse=True)
def default_settings():
    configure_tolerances()
    configure_solver()
    yield
    configure_tolerances()
    configure_solver()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


@pytest.fixture()
def hard_pair_4():
    return hard_instance(4)


@pytest.fixture()
def cluster_circular(rng):
    return cluster_ensemble(12, 0.08, rng), circular_ensemble(12, rng)
