"""Exact mean and variance of the polynomial RVO margin under Gaussian uncertainty.

The margin F = ||r||^2*||w||^2 - (r.w)^2 - R^2*||w||^2 involves two independent
2D Gaussians: the relative position r and the shared relative velocity w.  Both
moments therefore reduce to contractions of per-vector Gaussian moment tensors
of order at most four, which Isserlis' theorem gives in closed form for a full
2x2 covariance.  No sampling and no symbolic algebra is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Gaussian2, Poly, Vec2, psd_matrix


@dataclass(frozen=True, eq=False)
class UncertainPair:
    """Gaussian beliefs for one robot pair: positions, current velocities,
    actuation noise of the ego's commanded velocity, and combined radius.

    All five sources of uncertainty are mutually independent.
    """

    pi: Gaussian2
    pj: Gaussian2
    vi: Gaussian2
    vj: Gaussian2
    actuation_cov: np.ndarray
    R: float

    def __post_init__(self):
        object.__setattr__(self, "actuation_cov", psd_matrix(self.actuation_cov))
        if not self.R > 0.0:
            raise ValueError(f"combined radius must be positive, got {self.R}")

    def relative_position(self) -> Gaussian2:
        """r = pj - pi; covariances add by independence."""
        return Gaussian2(self.pj.mean - self.pi.mean, self.pi.cov + self.pj.cov)

    def shared_velocity(self, commanded: Vec2) -> Gaussian2:
        """w = 2*(commanded + actuation noise) - vi - vj."""
        mean = commanded * 2.0 - self.vi.mean - self.vj.mean
        cov = 4.0 * self.actuation_cov + self.vi.cov + self.vj.cov
        return Gaussian2(mean, cov)


@dataclass(frozen=True)
class ScaledPolys:
    """Mean and variance of the margin along a scaled path, as polynomials in s.

    mu has degree <= 2 and var degree <= 4; var(s) is a variance and is clamped
    at zero when round-off drives it slightly negative.
    """

    mu: Poly
    var: Poly

    def __post_init__(self):
        if self.mu.degree > 2:
            raise ValueError("mean polynomial must have degree <= 2")

    def var_at(self, s: float) -> float:
        return max(self.var(s), 0.0)

    def sigma_at(self, s: float) -> float:
        return float(np.sqrt(self.var_at(s)))


class _VectorStats:
    """Moment contractions of one 2D Gaussian, orders two and four.

    M[a,b] = E[x_a x_b], T[a,b] = E[||x||^2 x_a x_b], m4 = E[||x||^4], and
    Q[a,b,c,d] = E[x_a x_b x_c x_d] from Isserlis' theorem with mean: the three
    covariance pairings, the six mean-pair terms, and the pure mean term.
    """

    __slots__ = ("M", "T", "m4", "Q", "tr_M", "noisy")

    def __init__(self, mean: np.ndarray, cov: np.ndarray):
        m, S = mean, cov
        self.noisy = bool(np.any(S != 0.0))
        self.M = S + np.outer(m, m)
        mo = np.outer(m, m)
        Q = (
            S[:, :, None, None] * S[None, None, :, :]
            + S[:, None, :, None] * S[None, :, None, :]
            + S[:, None, None, :] * S[None, :, :, None]
            + mo[:, :, None, None] * S[None, None, :, :]
            + mo[:, None, :, None] * S[None, :, None, :]
            + mo[:, None, None, :] * S[None, :, :, None]
            + mo[None, :, :, None] * S[:, None, None, :]
            + mo[None, :, None, :] * S[:, None, :, None]
            + mo[None, None, :, :] * S[:, :, None, None]
            + mo[:, :, None, None] * mo[None, None, :, :]
        )
        self.Q = Q
        self.T = Q[0, 0] + Q[1, 1]
        self.m4 = float(self.T[0, 0] + self.T[1, 1])
        self.tr_M = float(self.M[0, 0] + self.M[1, 1])


def _combine(rs: _VectorStats, ws: _VectorStats, R: float) -> tuple[float, float]:
    """(E[F], Var[F]) from per-vector stats of independent r and w.

    With A = ||r||^2, B = ||w||^2, C = (r.w)^2:
      E[F]   = E[A]E[B] - <Mr, Mw> - R^2 E[B]
      E[F^2] = E[A^2]E[B^2] + <Qr, Qw> + R^4 E[B^2]
               - 2<Tr, Tw> + 2 R^2 <Mr, Tw> - 2 R^2 E[A] E[B^2]
    where <.,.> is the full index contraction (Frobenius inner product).
    """
    R2 = R * R
    mean = rs.tr_M * ws.tr_M - float(np.sum(rs.M * ws.M)) - R2 * ws.tr_M
    if not (rs.noisy or ws.noisy):
        # fully deterministic inputs: the E[F^2] - E[F]^2 cancellation would
        # otherwise leave round-off where the variance is exactly zero
        return mean, 0.0
    second = (
        rs.m4 * ws.m4
        + float(np.sum(rs.Q * ws.Q))
        + R2 * R2 * ws.m4
        - 2.0 * float(np.sum(rs.T * ws.T))
        + 2.0 * R2 * float(np.sum(rs.M * ws.T))
        - 2.0 * R2 * rs.tr_M * ws.m4
    )
    return mean, max(second - mean * mean, 0.0)


def margin_moments(u: UncertainPair, commanded: Vec2) -> tuple[float, float]:
    """Closed-form (E[F], Var[F]) of the polynomial margin at a commanded velocity.

    Writing F = A*B - C - R^2*B with A = ||r||^2, B = ||w||^2, C = (r.w)^2 and
    r independent of w, every term of F and F^2 factorizes into per-vector
    moments of order <= 4.  The variance is clamped at zero.
    """
    r = u.relative_position()
    w = u.shared_velocity(commanded)
    rs = _VectorStats(r.mean.as_array(), r.cov)
    ws = _VectorStats(w.mean.as_array(), w.cov)
    return _combine(rs, ws, u.R)


# Interpolation nodes: five values pin the quartic variance exactly, the middle
# three pin the quadratic mean; s = 3 is held out to certify the degrees.
_NODES = (-2.0, -1.0, 0.0, 1.0, 2.0)
_HOLDOUT = 3.0
_HOLDOUT_RTOL = 1e-6
_VANDER_INV = np.linalg.inv(np.vander(np.array(_NODES), 5, increasing=True))


def scaled_margin_polys(u: UncertainPair, direction: Vec2) -> ScaledPolys:
    """Exact mu(s) = E[F] and var(s) = Var[F] with commanded velocity s*direction.

    F is quadratic in s, so mu is a quadratic and var a quartic; coefficients
    are recovered by interpolating margin_moments at fixed nodes, then checked
    against a held-out node.  A held-out mismatch means the degree assumption
    broke, which is an implementation bug rather than bad data.
    """
    if direction.norm_sq() == 0.0:
        raise ValueError("candidate direction must be nonzero")
    r = u.relative_position()
    rs = _VectorStats(r.mean.as_array(), r.cov)
    w_cov = 4.0 * u.actuation_cov + u.vi.cov + u.vj.cov
    w_cov = psd_matrix(w_cov)
    d = direction.as_array()
    vsum = u.vi.mean.as_array() + u.vj.mean.as_array()

    def at(s: float) -> tuple[float, float]:
        return _combine(rs, _VectorStats(2.0 * s * d - vsum, w_cov), u.R)

    vals = [at(s) for s in _NODES]
    mus = [v[0] for v in vals]
    vrs = np.array([v[1] for v in vals])

    # Quadratic through s = -1, 0, 1 (indices 1..3 of the node list).
    c = mus[2]
    a = 0.5 * (mus[3] + mus[1]) - mus[2]
    b = 0.5 * (mus[3] - mus[1])
    mu_poly = Poly((c, b, a))
    var_poly = Poly(tuple(_VANDER_INV @ vrs))

    mu_h, var_h = at(_HOLDOUT)
    if abs(mu_poly(_HOLDOUT) - mu_h) > _HOLDOUT_RTOL * (1.0 + abs(mu_h)):
        raise ValueError("degree assumption violated")
    if abs(var_poly(_HOLDOUT) - var_h) > _HOLDOUT_RTOL * (1.0 + abs(var_h)):
        raise ValueError("degree assumption violated")
    return ScaledPolys(mu_poly, var_poly)
