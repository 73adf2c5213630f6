import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n=4):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (G + G.conj().T) / 2


def random_density(rng, n=4, k=None):
    G = rng.standard_normal((n, k or n)) + 1j * rng.standard_normal((n, k or n))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_sl2(rng):
    F = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return F / np.sqrt(np.linalg.det(F))
