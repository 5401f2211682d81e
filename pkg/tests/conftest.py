import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def random_reduced(rng, q_max: int):
    from almost_mathieu.core import reduce_fraction
    from math import gcd

    while True:
        q = int(rng.integers(1, q_max + 1))
        p = int(rng.integers(0, q)) if q > 1 else 0
        if gcd(p, q) == 1 or (p == 0 and q == 1):
            return reduce_fraction(p, q)
