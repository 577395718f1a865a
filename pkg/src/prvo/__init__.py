"""Probabilistic reciprocal velocity obstacles for 2D multi-robot avoidance.

Chance constraints over the deterministic RVO inequality are replaced by the
surrogate family mu - k*sigma >= 0, solved in closed form along time-scaled
candidate paths, with Cantelli's inequality mapping k to a guaranteed
satisfaction probability.
"""

from .baselines import (
    InflationConfig,
    OrcaHalfplane,
    inflated_feasible_scales,
    orca_halfplane_from_pair,
    porca_feasible,
)
from .geometry import (
    Gaussian2,
    Interval,
    IntervalSet,
    Poly,
    Vec2,
    interval_intersect,
    poly_real_roots,
    quadratic_geq_zero,
)
from .moments import ScaledPolys, UncertainPair, margin_moments, scaled_margin_polys
from .montecarlo import empirical_eta, mc_moments, sample_gaussian2, substream
from .rvo import PairGeometry, RobotState, rvo_margin, rvo_margin_poly, step_integrator
from .simulator import RobotConfig, Scenario, generate_candidates, plan_step, run
from .surrogate import (
    SurrogateProblem,
    cantelli_eta,
    cantelli_k,
    choose_expansion_point,
    feasible_scales,
    solve_exact,
    solve_taylor,
)

__all__ = [
    "Gaussian2",
    "InflationConfig",
    "Interval",
    "IntervalSet",
    "OrcaHalfplane",
    "PairGeometry",
    "Poly",
    "RobotConfig",
    "RobotState",
    "ScaledPolys",
    "Scenario",
    "SurrogateProblem",
    "UncertainPair",
    "Vec2",
    "cantelli_eta",
    "cantelli_k",
    "choose_expansion_point",
    "empirical_eta",
    "feasible_scales",
    "generate_candidates",
    "inflated_feasible_scales",
    "interval_intersect",
    "margin_moments",
    "mc_moments",
    "orca_halfplane_from_pair",
    "plan_step",
    "poly_real_roots",
    "porca_feasible",
    "quadratic_geq_zero",
    "run",
    "rvo_margin",
    "rvo_margin_poly",
    "sample_gaussian2",
    "scaled_margin_polys",
    "solve_exact",
    "solve_taylor",
    "step_integrator",
    "substream",
]

__version__ = "0.1.0"
