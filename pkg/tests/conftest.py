import random

import pytest

from varigap.trajectory import PLTrajectory


def random_pl(rng: random.Random, n_min=2, n_max=8, lo=-2.0, hi=2.0, start=None) -> PLTrajectory:
    """Random piecewise-linear trajectory on [0, 1]."""
    n = rng.randint(n_min, n_max)
    inner = sorted(set(rng.uniform(0.03, 0.97) for _ in range(n)))
    times = [0.0] + inner + [1.0]
    values = [rng.uniform(lo, hi) for _ in times]
    if start is not None:
        values[0] = start
    return PLTrajectory(times, values)


def random_positive_pl(rng: random.Random, n_min=2, n_max=8) -> PLTrajectory:
    """Random trajectory bounded away from zero (for singular integrands)."""
    return random_pl(rng, n_min, n_max, lo=0.1, hi=3.0, start=rng.uniform(0.1, 3.0))


@pytest.fixture
def rng():
    return random.Random(20240817)
