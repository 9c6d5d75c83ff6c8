import math

import numpy as np
import pytest

from qrelay.linalg import SubsystemShape, make_rng


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def hashing_value(p: float) -> float:
    """Closed form ``1 - h(3p/4) - (3p/4) log2 3`` for ``(1-p) rho + p I/2``."""
    q = 0.75 * p
    return 1.0 - binary_entropy(q) - q * math.log2(3.0)


def random_hermitian(d: int, seed: int) -> np.ndarray:
    rng = make_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def shape(**dims) -> SubsystemShape:
    return SubsystemShape.of(**dims)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
