"""Synchronous multi-robot stepping loop with candidate paths and noisy actuation.

Each tick every robot draws a noisy belief of every robot's state, solves the
time-scaled surrogate along a handful of candidate directions against all
neighbors, commands the feasible velocity closest to its goal-directed
preference, and then executes it with actuation noise.  Everything is keyed
off the scenario seed, so a run is a pure function of its scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Gaussian2, Interval, IntervalSet, Vec2, psd_matrix
from .moments import UncertainPair, scaled_margin_polys
from .montecarlo import empirical_eta, substream
from .rvo import RobotState, step_integrator
from .surrogate import (
    SurrogateProblem,
    choose_expansion_point,
    feasible_scales,
    solve_taylor,
    taylor_quadratic,
)

_FALLBACK_GRID = 1001


@dataclass(frozen=True)
class RobotConfig:
    """One robot's start, goal, geometry, and noise levels."""

    start: Vec2
    goal: Vec2
    radius: float
    pos_cov: np.ndarray
    vel_cov: np.ndarray
    actuation_cov: np.ndarray
    preferred_speed: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not self.preferred_speed > 0.0:
            raise ValueError(f"preferred speed must be positive, got {self.preferred_speed}")
        for name in ("pos_cov", "vel_cov", "actuation_cov"):
            object.__setattr__(self, name, psd_matrix(getattr(self, name)))


@dataclass(frozen=True)
class Scenario:
    """Full simulation configuration; (scenario, seed) determines every output bit."""

    robots: tuple[RobotConfig, ...]
    k: float
    n_candidates: int = 8
    s_max: float = 2.0
    dt: float = 0.1
    max_steps: int = 200
    goal_tolerance: float = 0.1
    seed: int = 0
    ego_uncertainty_enabled: bool = True
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "robots", tuple(self.robots))
        if len(self.robots) < 1:
            raise ValueError("scenario needs at least one robot")
        if self.k < 0.0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if self.n_candidates < 1:
            raise ValueError("need at least one candidate direction")
        if not self.s_max > 0.0:
            raise ValueError("s_max must be positive")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not self.goal_tolerance > 0.0:
            raise ValueError("goal tolerance must be positive")


@dataclass(frozen=True)
class RobotBelief:
    """One observer's Gaussian view of one robot, plus that robot's actuation noise."""

    radius: float
    position: Gaussian2
    velocity: Gaussian2
    actuation_cov: np.ndarray


@dataclass(frozen=True)
class PlanRecord:
    """Diagnostics from one robot's planning call."""

    commanded: Vec2
    candidate_index: int
    s: float
    pair_scales: dict[int, IntervalSet]
    infeasible: bool


@dataclass(frozen=True)
class StepRecord:
    commanded: Vec2
    executed: Vec2
    candidate_index: int
    s: float
    pair_scales: dict[int, IntervalSet]
    infeasible: bool
    position: Vec2
    eta: float | None = None


@dataclass(frozen=True)
class StepLog:
    step: int
    robots: tuple[StepRecord, ...]


@dataclass
class Summary:
    steps: int
    goal_reached: list[bool]
    min_pair_distance: float
    collision_steps: int
    infeasible_steps: int

    @property
    def any_collision(self) -> bool:
        return self.collision_steps > 0

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "goal_reached": self.goal_reached,
            "min_pair_distance": (
                None if math.isinf(self.min_pair_distance) else self.min_pair_distance
            ),
            "collision_steps": self.collision_steps,
            "infeasible_steps": self.infeasible_steps,
            "collision": self.any_collision,
        }


@dataclass
class RunResult:
    logs: list[StepLog] = field(default_factory=list)
    summary: Summary | None = None


def generate_candidates(current_vel: Vec2, toward_goal: Vec2, n: int, seed) -> list[Vec2]:
    """Candidate velocities: the goal-directed one plus n-1 random headings.

    All candidates share the magnitude of toward_goal; extra headings are drawn
    uniformly within +-120 degrees of the goal heading.  A robot already at its
    goal gets the single zero candidate.  current_vel is accepted for interface
    parity but the heading fan is anchored on the goal direction.
    """
    if n < 1:
        raise ValueError("need at least one candidate")
    speed = toward_goal.norm()
    if speed == 0.0:
        return [Vec2(0.0, 0.0)]
    out = [toward_goal]
    if n > 1:
        rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
        heading = math.atan2(toward_goal.y, toward_goal.x)
        angles = heading + rng.uniform(-2.0 * math.pi / 3.0, 2.0 * math.pi / 3.0, n - 1)
        out.extend(Vec2(speed * math.cos(a), speed * math.sin(a)) for a in angles)
    return out


def _preferred_velocity(scenario: Scenario, belief_pos: Vec2, robot_id: int) -> Vec2:
    """Goal-directed velocity, capped so the robot does not overshoot in one step."""
    cfg = scenario.robots[robot_id]
    to_goal = cfg.goal - belief_pos
    dist = to_goal.norm()
    if dist <= scenario.goal_tolerance:
        return Vec2(0.0, 0.0)
    speed = min(cfg.preferred_speed, dist / scenario.dt)
    return to_goal * (speed / dist)


def build_pair(
    scenario: Scenario, beliefs: list[RobotBelief], robot_id: int, other_id: int,
    with_actuation: bool,
) -> UncertainPair:
    """The uncertainty model robot_id uses against other_id."""
    ego, other = beliefs[robot_id], beliefs[other_id]
    act = ego.actuation_cov if with_actuation else np.zeros((2, 2))
    return UncertainPair(
        pi=ego.position,
        pj=other.position,
        vi=ego.velocity,
        vj=other.velocity,
        actuation_cov=act,
        R=ego.radius + other.radius,
    )


def plan_step(
    scenario: Scenario,
    beliefs: list[RobotBelief],
    robot_id: int,
    rng=None,
) -> tuple[Vec2, PlanRecord]:
    """Choose a commanded velocity for one robot from its beliefs.

    Every candidate direction is solved against every neighbor via the Taylor
    surrogate; among nonempty intersections the (candidate, scale) closest to
    the preferred velocity wins.  If nothing is feasible the robot commands the
    goal-directed candidate at the scale maximizing the worst surrogate value
    and the step is flagged.
    """
    if rng is None:
        rng = substream(scenario.seed, "cand", robot_id)
    ego = beliefs[robot_id]
    v_pref = _preferred_velocity(scenario, ego.position.mean, robot_id)
    neighbors = [j for j in range(len(beliefs)) if j != robot_id]
    domain = Interval(0.0, scenario.s_max)

    if v_pref.norm_sq() == 0.0:
        return Vec2(0.0, 0.0), PlanRecord(Vec2(0.0, 0.0), -1, 0.0, {}, False)

    candidates = generate_candidates(
        ego.velocity.mean, v_pref, scenario.n_candidates, rng
    )
    if not neighbors:
        return v_pref, PlanRecord(v_pref, 0, 1.0, {}, False)

    pairs = {
        j: build_pair(scenario, beliefs, robot_id, j, scenario.ego_uncertainty_enabled)
        for j in neighbors
    }

    best = None  # (cost, candidate index, s, per-pair scales)
    first_problems: list[SurrogateProblem] = []
    for ci, d in enumerate(candidates):
        problems = []
        for j in neighbors:
            polys = scaled_margin_polys(pairs[j], d)
            problems.append(
                SurrogateProblem(
                    polys, scenario.k, domain, choose_expansion_point(polys, domain)
                )
            )
        if ci == 0:
            first_problems = problems
        per_pair = {j: solve_taylor(p) for j, p in zip(neighbors, problems)}
        feasible = None
        for ss in per_pair.values():
            feasible = ss if feasible is None else feasible.intersect(ss)
        if feasible.is_empty:
            continue
        s_unc = d.dot(v_pref) / d.norm_sq()
        s = feasible.nearest_point(s_unc)
        cost = (d * s - v_pref).norm()
        if best is None or cost < best[0]:
            best = (cost, ci, s, per_pair)
    if best is not None:
        _, ci, s, per_pair = best
        cmd = candidates[ci] * s
        return cmd, PlanRecord(cmd, ci, s, per_pair, False)

    # Best effort: goal-directed candidate at the scale with the least-bad
    # worst-case Taylor surrogate value.
    quads = [taylor_quadratic(p) for p in first_problems]
    grid = np.linspace(0.0, scenario.s_max, _FALLBACK_GRID)
    worst = np.full(grid.shape, np.inf)
    for q in quads:
        worst = np.minimum(worst, np.array([q(s) for s in grid]))
    s = float(grid[int(np.argmax(worst))])
    cmd = candidates[0] * s
    per_pair = {j: solve_taylor(p) for j, p in zip(neighbors, first_problems)}
    return cmd, PlanRecord(cmd, 0, s, per_pair, True)


def _draw_vec(rng: np.random.Generator, cov: np.ndarray) -> Vec2:
    w, v = np.linalg.eigh(cov)
    root = (v * np.sqrt(np.maximum(w, 0.0))) @ v.T
    z = rng.standard_normal(2)
    return Vec2.from_array(root @ z)


def observe(
    scenario: Scenario, states: list[RobotState], step: int, observer: int
) -> list[RobotBelief]:
    """The observer's noisy Gaussian beliefs about every robot (itself included)."""
    beliefs = []
    for j, st in enumerate(states):
        cfg = scenario.robots[j]
        rng = substream(scenario.seed, "obs", step, observer, j)
        dp = _draw_vec(rng, cfg.pos_cov)
        dv = _draw_vec(rng, cfg.vel_cov)
        beliefs.append(
            RobotBelief(
                radius=cfg.radius,
                position=Gaussian2(st.position + dp, cfg.pos_cov),
                velocity=Gaussian2(st.velocity + dv, cfg.vel_cov),
                actuation_cov=cfg.actuation_cov,
            )
        )
    return beliefs


def _pairwise_min_distance(states: list[RobotState]) -> float:
    best = math.inf
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            best = min(best, (states[i].position - states[j].position).norm())
    return best


def _any_overlap(scenario: Scenario, states: list[RobotState]) -> bool:
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            d = (states[i].position - states[j].position).norm()
            if d < scenario.robots[i].radius + scenario.robots[j].radius:
                return True
    return False


def _all_reached(scenario: Scenario, states: list[RobotState]) -> bool:
    return all(
        (st.position - cfg.goal).norm() <= scenario.goal_tolerance
        for st, cfg in zip(states, scenario.robots)
    )


def run(scenario: Scenario, validate_n: int = 0) -> RunResult:
    """Run the scenario to goal or step limit; optionally validate each step.

    With validate_n > 0, every planning robot's commanded velocity is scored by
    empirical_eta (minimum over its neighbor pairs, actuation noise always
    included) at validate_n samples.  Robots holding at their goal command zero
    velocity without solving the surrogate, so no eta is recorded for them.
    """
    states = [RobotState(cfg.start, Vec2(0.0, 0.0), cfg.radius) for cfg in scenario.robots]
    n = len(states)
    result = RunResult()
    min_dist = _pairwise_min_distance(states)
    collision_steps = 0
    infeasible_steps = 0

    for step in range(scenario.max_steps):
        if _all_reached(scenario, states):
            break
        plans: list[PlanRecord] = []
        observer_beliefs: list[list[RobotBelief]] = []
        for i in range(n):
            beliefs = observe(scenario, states, step, i)
            observer_beliefs.append(beliefs)
            _, rec = plan_step(
                scenario, beliefs, i, rng=substream(scenario.seed, "cand", step, i)
            )
            plans.append(rec)
            if rec.infeasible:
                infeasible_steps += 1

        records = []
        new_states = []
        for i, rec in enumerate(plans):
            rng = substream(scenario.seed, "act", step, i)
            eps = _draw_vec(rng, scenario.robots[i].actuation_cov)
            executed = rec.commanded + eps
            new_states.append(step_integrator(states[i], executed, scenario.dt))

            eta = None
            if validate_n > 0 and rec.candidate_index >= 0 and n > 1:
                etas = []
                for j in range(n):
                    if j == i:
                        continue
                    pair = build_pair(scenario, observer_beliefs[i], i, j, True)
                    est = empirical_eta(
                        pair,
                        rec.commanded,
                        validate_n,
                        substream(scenario.seed, "val", step, i, j),
                    )
                    etas.append(est.eta)
                eta = min(etas)
            records.append(
                StepRecord(
                    commanded=rec.commanded,
                    executed=executed,
                    candidate_index=rec.candidate_index,
                    s=rec.s,
                    pair_scales=rec.pair_scales,
                    infeasible=rec.infeasible,
                    position=new_states[-1].position,
                    eta=eta,
                )
            )
        states = new_states
        min_dist = min(min_dist, _pairwise_min_distance(states))
        if _any_overlap(scenario, states):
            collision_steps += 1
        result.logs.append(StepLog(step, tuple(records)))

    result.summary = Summary(
        steps=len(result.logs),
        goal_reached=[
            (st.position - cfg.goal).norm() <= scenario.goal_tolerance
            for st, cfg in zip(states, scenario.robots)
        ],
        min_pair_distance=min_dist,
        collision_steps=collision_steps,
        infeasible_steps=infeasible_steps,
    )
    return result
