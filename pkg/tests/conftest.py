import numpy as np
import pytest

from nbldpc import gf


@pytest.fixture(scope="session")
def gf4():
    return gf.make_field(2)


@pytest.fixture(scope="session")
def gf16():
    return gf.make_field(4)


@pytest.fixture(scope="session")
def gf64():
    return gf.make_field(6)


@pytest.fixture(scope="session")
def gf1024():
    return gf.make_field(10)


def random_message(rng: np.random.Generator, q: int) -> np.ndarray:
    """Strictly positive normalized probability vector."""
    m = rng.random(q) + 1e-3
    return m / m.sum()
