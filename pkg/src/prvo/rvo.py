"""Deterministic reciprocal velocity obstacle (RVO) constraint for disc robots.

Two robots share avoidance effort equally, so the constraint is evaluated at
the shared relative velocity w = 2*v_avoid - v_i - v_j: the avoidance velocity
is collision-free exactly when the ray along w from the ego robot misses the
disc of combined radius centered at the relative position.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import Poly, Vec2

# Below this speed the rational margin's ray direction is undefined.
W_DEGENERATE_SPEED = 1e-9


@dataclass(frozen=True)
class RobotState:
    """Position, current velocity, and disc radius of one robot."""

    position: Vec2
    velocity: Vec2
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class PairGeometry:
    """One robot pair's constraint inputs.

    r is the relative position (other minus ego); R the Minkowski-sum radius
    R_i + R_j; vrvo the ego's candidate avoidance velocity.
    """

    r: Vec2
    R: float
    vi: Vec2
    vj: Vec2
    vrvo: Vec2

    def __post_init__(self):
        if not self.R > 0.0:
            raise ValueError(f"combined radius must be positive, got {self.R}")

    def w(self) -> Vec2:
        """Shared relative velocity 2*vrvo - vi - vj (reciprocity factor 2)."""
        return self.vrvo * 2.0 - self.vi - self.vj


def rvo_margin(g: PairGeometry) -> float:
    """Signed clearance (m^2) of the RVO constraint, rational form.

    Returns ||r||^2 - (r.w)^2/||w||^2 - R^2: the squared distance from the
    disc center to the line along w, minus the squared combined radius.
    Positive means the avoidance velocity is collision-free.

    Raises ValueError when ||w|| <= 1e-9 (ray direction undefined).
    """
    w = g.w()
    wn2 = w.norm_sq()
    if wn2 <= W_DEGENERATE_SPEED * W_DEGENERATE_SPEED:
        raise ValueError("degenerate relative velocity")
    rw = g.r.dot(w)
    return g.r.norm_sq() - rw * rw / wn2 - g.R * g.R


def rvo_margin_poly(g: PairGeometry) -> float:
    """Polynomialized margin ||r||^2*||w||^2 - (r.w)^2 - R^2*||w||^2.

    Total on all inputs and sign-equivalent to rvo_margin whenever ||w|| > 0;
    degree 4 in the components of (r, vi, vj, vrvo), which is what makes exact
    Gaussian moments of it tractable.
    """
    w = g.w()
    wn2 = w.norm_sq()
    rw = g.r.dot(w)
    return g.r.norm_sq() * wn2 - rw * rw - g.R * g.R * wn2


def scaled_margin_quadratic(r: Vec2, R: float, vi: Vec2, vj: Vec2, direction: Vec2) -> Poly:
    """Deterministic margin along a scaled path, as a quadratic in the scale s.

    With the commanded velocity s*direction, w(s) = 2s*direction - (vi + vj)
    is affine in s and the polynomial margin collapses to degree 2:
    (||r||^2 - R^2)*||w(s)||^2 - (r.w(s))^2.
    """
    u0 = vi + vj
    lead = r.norm_sq() - R * R
    q2 = 4.0 * direction.norm_sq()
    q1 = -4.0 * direction.dot(u0)
    q0 = u0.norm_sq()
    rd = r.dot(direction)
    ru = r.dot(u0)
    return Poly((
        lead * q0 - ru * ru,
        lead * q1 + 4.0 * rd * ru,
        lead * q2 - 4.0 * rd * rd,
    ))


def step_integrator(state: RobotState, v: Vec2, dt: float) -> RobotState:
    """Advance a single-integrator robot by one Euler step of duration dt."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    return RobotState(state.position + v * dt, v, state.radius)
