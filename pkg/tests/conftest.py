"""Общие фикстуры тестов."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gfbbm.models import ModelParams
from gfbbm.petviashvili import default_seed, solve
from gfbbm.spectral import make_grid

settings.register_profile(
    "gfbbm",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.load_profile("gfbbm")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def reduced_grid():
    """Уменьшенная сетка с тем же шагом 2^-3 для быстрых расчётов."""
    return make_grid(2 ** 13, 512.0)


@pytest.fixture(scope="session")
def kdv_params():
    return ModelParams(alpha=1.0, nonlinearity=1, speed=1.1)


@pytest.fixture(scope="session")
def kdv_wave(reduced_grid, kdv_params):
    """Сошедшееся решение при alpha = 1, p = 1, c = 1.1."""
    result = solve(default_seed(reduced_grid, kdv_params), kdv_params)
    assert result.converged
    return result


@pytest.fixture(scope="session")
def solved_wave(reduced_grid):
    """Сошедшиеся решения на уменьшенной сетке, одно на тройку (alpha, p, c)."""
    cache = {}

    def get(alpha, p, c=1.1):
        key = (alpha, p, c)
        if key not in cache:
            params = ModelParams(alpha=alpha, nonlinearity=p, speed=c)
            result = solve(default_seed(reduced_grid, params), params)
            assert result.converged, params.label()
            cache[key] = result
        return cache[key]

    return get
