import numpy as np
import pytest

from chcon.sampling import rng_from


@pytest.fixture
def rng():
    return rng_from(20240817)


def seeded(*indices) -> np.random.Generator:
    return rng_from(20240817, *indices)
