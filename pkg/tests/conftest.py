import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_complex(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)
