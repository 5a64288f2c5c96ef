import math

import numpy as np
import pytest

from hjfront.coeffs import PiecewiseConstantFn as F
from hjfront.flux import offset_eikonal, quadratic_cap

SQ125 = math.sqrt(1.25)
SHOCK = 0.5 / SQ125  # (1.5 - 1) / sqrt(1.25)


@pytest.fixture
def eik():
    return offset_eikonal()


@pytest.fixture
def cap():
    return quadratic_cap()


def random_bv_data(seed, dom=(-2.0, 2.0)):
    """Random BV slope data with one a-jump and two g-jumps on (0, 1)."""
    rng = np.random.default_rng(seed)
    nb = rng.integers(3, 8)
    bps = np.sort(rng.uniform(-1.5, 1.5, nb))
    p0 = F.steps(bps, rng.uniform(-1, 1, nb + 1), dom)
    a = F.steps([rng.uniform(-1, 1)], rng.uniform(1, 2, 2), dom)
    g = F.steps(np.sort(rng.uniform(0.1, 0.9, 2)), rng.uniform(1, 1.3, 3), (0, 1))
    return p0, a, g


def interface_data():
    dom = (-2.0, 2.0)
    return F.constant(0.0, dom), F.steps([0.0], [1.0, 1.5], dom), F.constant(1.0, (0.0, 1.0))
