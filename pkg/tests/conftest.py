"""Shared randomized-instance generators for the test suite.

All generators take an explicit numpy Generator so every test is seeded and
reproducible.
"""

import math

import numpy as np
import pytest

from prvo import Gaussian2, UncertainPair, Vec2


def random_spd(rng, lo, hi):
    """Random 2x2 SPD matrix with eigenvalues in [lo, hi]."""
    ang = rng.uniform(0.0, math.pi)
    c, s = math.cos(ang), math.sin(ang)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag(rng.uniform(lo, hi, 2)) @ rot.T


def random_pair(rng, pos_scale=0.01, vel_scale=0.004, min_dist=1.5, max_dist=8.0):
    """A random two-robot uncertainty model with non-overlapping mean discs."""
    pi = Vec2(*rng.uniform(-5.0, 5.0, 2))
    ang = rng.uniform(0.0, 2.0 * math.pi)
    dist = rng.uniform(min_dist, max_dist)
    pj = Vec2(pi.x + dist * math.cos(ang), pi.y + dist * math.sin(ang))
    return UncertainPair(
        pi=Gaussian2(pi, random_spd(rng, 1e-5, pos_scale)),
        pj=Gaussian2(pj, random_spd(rng, 1e-5, pos_scale)),
        vi=Gaussian2(Vec2(*rng.uniform(-1.2, 1.2, 2)), random_spd(rng, 1e-5, vel_scale)),
        vj=Gaussian2(Vec2(*rng.uniform(-1.2, 1.2, 2)), random_spd(rng, 1e-5, vel_scale)),
        actuation_cov=random_spd(rng, 1e-5, vel_scale),
        R=rng.uniform(0.3, min(1.0, dist * 0.45)),
    )


def random_direction(rng, min_speed=0.2, max_speed=1.5):
    ang = rng.uniform(0.0, 2.0 * math.pi)
    speed = rng.uniform(min_speed, max_speed)
    return Vec2(speed * math.cos(ang), speed * math.sin(ang))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
