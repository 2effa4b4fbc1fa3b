import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rotorlab import RotorParams

K1 = 0.8 * math.pi
K2 = 0.6 * math.pi


@pytest.fixture
def paper_params() -> RotorParams:
    """The reference parameter set: eps = 0.01, k = (0.8, 0.6) pi, resonant beta."""
    return RotorParams.from_epsilon(0.01, K1, K2, beta=0.5)


@pytest.fixture
def resonant_params() -> RotorParams:
    """Exactly resonant kicking period (tau = 2*pi)."""
    return RotorParams.from_epsilon(0.0, K1, K2, beta=0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
