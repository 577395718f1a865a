"""Seeded sampling from the pair uncertainty model and empirical constraint statistics.

Randomness is organized as keyed substreams: a stream is fully determined by a
64-bit seed plus an arbitrary key tuple, so independent draws can be generated
in any order (or in parallel) without changing the statistics.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import Gaussian2, Vec2
from .moments import UncertainPair
from .rvo import W_DEGENERATE_SPEED


def substream(seed: int, *key) -> np.random.Generator:
    """An independent generator keyed by (seed, *key); strings hash via crc32."""
    parts = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for k in key:
        if isinstance(k, str):
            parts.append(zlib.crc32(k.encode()))
        else:
            parts.append(int(k) & 0xFFFFFFFFFFFFFFFF)
    return np.random.default_rng(tuple(parts))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(seed)


def sample_gaussian2(g: Gaussian2, seed, n: int) -> np.ndarray:
    """n draws from g as an (n, 2) array, via the symmetric covariance square root."""
    rng = _as_rng(seed)
    z = rng.standard_normal((n, 2))
    return g.mean.as_array() + z @ g.cov_sqrt().T


@dataclass(frozen=True)
class SampleBatch:
    """Joint draws from one pair's uncertainty model; same (seed, n) reproduces
    the arrays bit for bit."""

    seed: int
    n: int
    pi: np.ndarray
    pj: np.ndarray
    vi: np.ndarray
    vj: np.ndarray
    actuation: np.ndarray


def draw_joint(u: UncertainPair, n: int, seed) -> SampleBatch:
    """Independent joint samples of (pi, pj, vi, vj, actuation noise).

    Draw order is fixed (pi, pj, vi, vj, actuation) so a single stream still
    reproduces exactly.
    """
    rng = _as_rng(seed)
    act = Gaussian2(Vec2(0.0, 0.0), u.actuation_cov)
    return SampleBatch(
        seed=seed if isinstance(seed, int) else -1,
        n=n,
        pi=sample_gaussian2(u.pi, rng, n),
        pj=sample_gaussian2(u.pj, rng, n),
        vi=sample_gaussian2(u.vi, rng, n),
        vj=sample_gaussian2(u.vj, rng, n),
        actuation=sample_gaussian2(act, rng, n),
    )


def _margin_samples(u: UncertainPair, commanded: Vec2, batch: SampleBatch):
    """Vectorized polynomial margin over a joint batch; also the w speeds."""
    r = batch.pj - batch.pi
    vrvo = commanded.as_array() + batch.actuation
    w = 2.0 * vrvo - batch.vi - batch.vj
    rn2 = np.einsum("ij,ij->i", r, r)
    wn2 = np.einsum("ij,ij->i", w, w)
    rw = np.einsum("ij,ij->i", r, w)
    F = rn2 * wn2 - rw * rw - (u.R * u.R) * wn2
    return F, np.sqrt(wn2)


class EtaEstimate(NamedTuple):
    eta: float
    degenerate: int
    n: int


def empirical_eta(u: UncertainPair, commanded: Vec2, n: int, seed) -> EtaEstimate:
    """Fraction of joint draws whose margin is strictly positive.

    F = 0 counts as violated (conservative).  Degenerate draws with
    ||w|| <= 1e-9 are reported alongside; they count as violations too.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    batch = draw_joint(u, n, seed)
    F, w_speed = _margin_samples(u, commanded, batch)
    degenerate = int(np.count_nonzero(w_speed <= W_DEGENERATE_SPEED))
    return EtaEstimate(float(np.mean(F > 0.0)), degenerate, n)


class McMoments(NamedTuple):
    mean: float
    var: float
    stderr_mean: float
    stderr_var: float


def mc_moments(u: UncertainPair, commanded: Vec2, n: int, seed) -> McMoments:
    """Sample mean and variance of the margin, with standard errors.

    The variance standard error uses the asymptotic formula
    sqrt((m4 - var^2)/n) with m4 the fourth central sample moment.
    """
    if n < 100:
        raise ValueError("need at least 100 samples for moment estimation")
    batch = draw_joint(u, n, seed)
    F, _ = _margin_samples(u, commanded, batch)
    mean = float(np.mean(F))
    centered = F - mean
    var = float(np.sum(centered * centered) / (n - 1))
    m4 = float(np.mean(centered**4))
    stderr_mean = float(np.sqrt(var / n))
    stderr_var = float(np.sqrt(max(m4 - var * var, 0.0) / n))
    return McMoments(mean, var, stderr_mean, stderr_var)
