import numpy as np
import pytest

from dcboost import Example2dProblem, MsscProblem, SolverParams, generate_blobs


@pytest.fixture
def example2d():
    return Example2dProblem()


@pytest.fixture
def small_blobs():
    return generate_blobs(3, 40, spread=0.6, seed=11)


@pytest.fixture
def mssc3(small_blobs):
    return MsscProblem(small_blobs, k=3)


@pytest.fixture
def params():
    return SolverParams()


@pytest.fixture
def rng():
    return np.random.default_rng(987)
