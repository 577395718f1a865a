"""Comparison methods: radius-inflation RVO and chance-constrained ORCA (PORCA).

The inflation baseline replaces probabilistic reasoning with geometry: robot
radii grow until a circle holds the requested probability mass of the combined
position uncertainty, plus a velocity-uncertainty term mapped through a time
horizon.  PORCA applies a linear chance-constraint back-off to the standard
ORCA half-plane; it is implemented only far enough to demonstrate that the
back-off shrinks the deterministic ORCA set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize
from scipy.stats import chi2

from .geometry import Gaussian2, Interval, IntervalSet, Vec2, poly_nonneg_set
from .moments import UncertainPair
from .rvo import scaled_margin_quadratic


@dataclass(frozen=True)
class InflationConfig:
    """Confidence level of the contour used to inflate radii.

    velocity_horizon converts the velocity-contour radius (m/s) into an extra
    clearance (m): uncertain velocity held for that long becomes displacement.
    """

    confidence: float
    velocity_horizon: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0,1), got {self.confidence}")
        if self.velocity_horizon < 0.0:
            raise ValueError("velocity horizon must be >= 0")


def confidence_circle_radius(cov, confidence: float) -> float:
    """Radius of the origin-centered circle holding `confidence` mass of N(0, cov).

    Isotropic and rank-one covariances use the chi-square quantile directly;
    the general anisotropic case solves the weighted chi-square CDF
    numerically (1D quadrature plus bracketing root find).
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0,1), got {confidence}")
    w = np.linalg.eigvalsh(np.asarray(cov, dtype=float))
    lo_ev, hi_ev = max(float(w[0]), 0.0), max(float(w[1]), 0.0)
    if hi_ev == 0.0:
        return 0.0
    if lo_ev == 0.0:
        return math.sqrt(hi_ev * chi2.ppf(confidence, df=1))
    if abs(hi_ev - lo_ev) <= 1e-12 * hi_ev:
        return math.sqrt(hi_ev * chi2.ppf(confidence, df=2))

    def mass_inside(rho: float) -> float:
        # P(l1 z1^2 + l2 z2^2 <= rho^2) for independent standard normals.
        zmax = rho / math.sqrt(hi_ev)

        def integrand(z):
            u = (rho * rho - hi_ev * z * z) / lo_ev
            return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) * math.erf(
                math.sqrt(0.5 * u)
            )

        val, _ = integrate.quad(integrand, -zmax, zmax, limit=200)
        return val

    lo_r = math.sqrt(lo_ev * chi2.ppf(confidence, df=2))
    hi_r = math.sqrt(hi_ev * chi2.ppf(confidence, df=2))
    return float(
        optimize.brentq(lambda r: mass_inside(r) - confidence, lo_r, hi_r, xtol=1e-10)
    )


class InflationResult(NamedTuple):
    scales: IntervalSet
    already_colliding: bool


def inflated_feasible_scales(
    u: UncertainPair, direction: Vec2, cfg: InflationConfig, domain: Interval
) -> InflationResult:
    """Feasible time scales after replacing uncertainty with radius growth.

    The combined radius grows by the position-contour radius plus the
    velocity-contour radius times the horizon; the deterministic quadratic
    margin is then solved at the mean geometry.  Robots already overlapping at
    the inflated radius yield an empty set with the colliding flag raised.
    """
    rho_pos = confidence_circle_radius(u.pi.cov + u.pj.cov, cfg.confidence)
    vel_cov = u.vi.cov + u.vj.cov + u.actuation_cov
    rho_vel = confidence_circle_radius(vel_cov, cfg.confidence)
    R_infl = u.R + rho_pos + rho_vel * cfg.velocity_horizon
    r = u.pj.mean - u.pi.mean
    if r.norm() <= R_infl:
        return InflationResult(IntervalSet.empty(), True)
    mu_det = scaled_margin_quadratic(r, R_infl, u.vi.mean, u.vj.mean, direction)
    return InflationResult(poly_nonneg_set(mu_det, domain), False)


@dataclass(frozen=True, eq=False)
class OrcaHalfplane:
    """Linear avoidance constraint normal.v - offset >= 0 with an uncertain normal."""

    z1: Gaussian2
    z2: float

    def __post_init__(self):
        if not self.z1.mean.norm() > 0.0:
            raise ValueError("half-plane normal must be nonzero")


def _orca_direction_and_u(rp: Vec2, vrel: Vec2, R: float, tau: float):
    """Boundary direction and correction vector u of the truncated VO at vrel.

    Mirrors the standard geometric construction: project onto the cutoff disc
    when the relative velocity sits behind it, otherwise onto the nearer leg.
    The symmetric (head-on) tie projects onto the left leg.
    """
    inv_tau = 1.0 / tau
    dist_sq = rp.norm_sq()
    R_sq = R * R
    w0 = vrel - rp * inv_tau
    w_sq = w0.norm_sq()
    dot1 = w0.dot(rp)
    if dot1 < 0.0 and dot1 * dot1 > R_sq * w_sq:
        w_len = math.sqrt(w_sq)
        unit_w = w0 * (1.0 / w_len)
        direction = Vec2(unit_w.y, -unit_w.x)
        u = unit_w * (R * inv_tau - w_len)
    else:
        leg = math.sqrt(dist_sq - R_sq)
        if rp.x * w0.y - rp.y * w0.x >= 0.0:
            # Left leg (tie-break lands here for exactly head-on geometry).
            direction = Vec2(rp.x * leg - rp.y * R, rp.x * R + rp.y * leg) * (
                1.0 / dist_sq
            )
        else:
            direction = -Vec2(rp.x * leg + rp.y * R, -rp.x * R + rp.y * leg) * (
                1.0 / dist_sq
            )
        u = direction * vrel.dot(direction) - vrel
    return direction, u


def orca_halfplane_from_pair(u: UncertainPair, time_horizon: float = 2.0) -> OrcaHalfplane:
    """Standard ORCA half-plane at the mean geometry, with half responsibility.

    The normal's covariance is propagated from the two velocity covariances by
    first-order (finite-difference) linearization; the offset is treated as
    deterministic.  Raises for discs overlapping at the mean.
    """
    rp = u.pj.mean - u.pi.mean
    if rp.norm() <= u.R:
        raise ValueError("in collision at mean")

    def normal_of(vi: Vec2, vj: Vec2) -> Vec2:
        direction, _ = _orca_direction_and_u(rp, vi - vj, u.R, time_horizon)
        return direction.perp_ccw()

    vi0, vj0 = u.vi.mean, u.vj.mean
    _, u_vec = _orca_direction_and_u(rp, vi0 - vj0, u.R, time_horizon)
    n = normal_of(vi0, vj0)
    point = vi0 + u_vec * 0.5
    z2 = n.dot(point)

    h = 1e-5 * (1.0 + max(vi0.norm(), vj0.norm()))
    jac = np.zeros((2, 4))
    for col, (dvi, dvj) in enumerate(
        [
            (Vec2(h, 0.0), Vec2(0.0, 0.0)),
            (Vec2(0.0, h), Vec2(0.0, 0.0)),
            (Vec2(0.0, 0.0), Vec2(h, 0.0)),
            (Vec2(0.0, 0.0), Vec2(0.0, h)),
        ]
    ):
        plus = normal_of(vi0 + dvi, vj0 + dvj)
        minus = normal_of(vi0 - dvi, vj0 - dvj)
        jac[0, col] = (plus.x - minus.x) / (2.0 * h)
        jac[1, col] = (plus.y - minus.y) / (2.0 * h)
    vel_cov = np.zeros((4, 4))
    vel_cov[:2, :2] = u.vi.cov
    vel_cov[2:, 2:] = u.vj.cov
    z1_cov = jac @ vel_cov @ jac.T
    return OrcaHalfplane(Gaussian2(n, 0.5 * (z1_cov + z1_cov.T)), z2)


def porca_feasible(h: OrcaHalfplane, v: Vec2, eta: float) -> bool:
    """Chance-constrained ORCA test: mean margin minus sqrt(eta) standard deviations.

    The back-off multiplier is sqrt(eta) (not the Gaussian quantile), which is
    all the shrinkage demonstration needs: the back-off term is nonnegative, so
    feasibility here implies deterministic ORCA feasibility.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError("unreachable confidence")
    va = v.as_array()
    backoff = math.sqrt(eta) * math.sqrt(max(float(va @ h.z1.cov @ va), 0.0))
    return h.z1.mean.dot(v) - h.z2 - backoff >= 0.0


def porca_feasible_scales(
    h: OrcaHalfplane, direction: Vec2, eta: float, domain: Interval
) -> IntervalSet:
    """Time scales s >= 0 with s*direction feasible under the PORCA constraint.

    Along a ray the constraint is linear in s: s*(z1.d - sqrt(eta)*sd) >= z2
    with sd the standard deviation of z1.d.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError("unreachable confidence")
    if domain.lo < 0.0:
        raise ValueError("negative time scales are excluded")
    d = direction.as_array()
    sd = math.sqrt(max(float(d @ h.z1.cov @ d), 0.0))
    alpha = h.z1.mean.dot(direction) - math.sqrt(eta) * sd
    if alpha > 0.0:
        lo = max(domain.lo, h.z2 / alpha)
        return IntervalSet.of(Interval(lo, domain.hi)) if lo <= domain.hi else IntervalSet.empty()
    if alpha < 0.0:
        hi = min(domain.hi, h.z2 / alpha)
        return IntervalSet.of(Interval(domain.lo, hi)) if hi >= domain.lo else IntervalSet.empty()
    return IntervalSet.of(domain) if h.z2 <= 0.0 else IntervalSet.empty()
