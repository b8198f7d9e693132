import numpy as np
import pytest

from eigenpath import families


@pytest.fixture
def qubit():
    return families.qubit_path()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_paths(count, dims, seed):
    rng = np.random.default_rng(seed)
    return [families.random_linear_path(int(dims[k % len(dims)]), rng) for k in range(count)]
