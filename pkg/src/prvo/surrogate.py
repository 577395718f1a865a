"""Solvers for the surrogate constraint mu(s) - k*sigma(s) >= 0 along a scaled path.

Two routes are provided: the production path Taylor-expands sigma to second
order around an expansion point, giving a single quadratic inequality in the
time scale s; the oracle path squares the constraint into an exact quartic.
Satisfying the surrogate at level k guarantees the underlying probabilistic
constraint holds with probability at least k^2/(1+k^2) (Cantelli's inequality).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Interval, IntervalSet, Poly, interval_intersect, poly_nonneg_set
from .moments import ScaledPolys

# sigma below this is treated as vanishing: sqrt derivatives blow up.
_SIGMA_FLOOR = 1e-12
_SHIFT_STEP = 0.1
_MAX_SHIFTS = 10


@dataclass(frozen=True)
class SurrogateProblem:
    """One robot pair's surrogate inequality along one candidate path."""

    polys: ScaledPolys
    k: float
    domain: Interval
    expansion_point: float

    def __post_init__(self):
        if self.k < 0.0:
            raise ValueError(f"confidence parameter k must be >= 0, got {self.k}")
        if self.domain.lo < 0.0:
            raise ValueError("negative time scales reverse motion and are excluded")


def cantelli_eta(k: float) -> float:
    """Guaranteed probability lower bound k^2/(1+k^2) for surrogate level k."""
    if k < 0.0:
        raise ValueError(f"k must be >= 0, got {k}")
    return k * k / (1.0 + k * k)


def cantelli_k(eta: float) -> float:
    """Surrogate level achieving probability eta: the inverse of cantelli_eta."""
    if not 0.0 <= eta < 1.0:
        raise ValueError("unreachable confidence")
    return math.sqrt(eta / (1.0 - eta))


def _variance_negligible(polys: ScaledPolys) -> bool:
    # Relative to the mean-polynomial scale squared: variance carries the
    # units of the margin squared.
    scale = (1.0 + polys.mu.max_abs_coeff()) ** 2
    return polys.var.is_zero or polys.var.max_abs_coeff() <= 1e-24 * scale


def _argmax_quadratic(p: Poly, domain: Interval) -> float:
    """Argmax of a polynomial of degree <= 2 over an interval (lo on ties).

    An unbounded domain with growth toward +inf cannot occur for callers that
    already know p < 0 somewhere beyond every root; the guard returns lo + 1.
    """
    a, b = p.coeff(2), p.coeff(1)
    if a < 0.0:
        vertex = -b / (2.0 * a)
        return min(max(vertex, domain.lo), domain.hi)
    if domain.is_unbounded:
        if a > 0.0 or b > 0.0:
            return domain.lo + 1.0
        return domain.lo
    if a == 0.0:
        return domain.hi if b > 0.0 else domain.lo
    return domain.lo if p(domain.lo) >= p(domain.hi) else domain.hi


def choose_expansion_point(polys: ScaledPolys, domain: Interval) -> float:
    """Pick the Taylor expansion point from the solution space of mu(s) >= 0.

    Uses the midpoint of the widest feasible interval (lo + 1 when unbounded),
    maximizing margin from the boundary where sigma derivatives degrade.  If mu
    is nowhere nonnegative on the domain, falls back to the argmax of mu.
    """
    feasible = poly_nonneg_set(polys.mu, domain)
    if feasible.is_empty:
        return _argmax_quadratic(polys.mu, domain)
    widest = feasible.widest()
    if widest.is_unbounded:
        return widest.lo + 1.0
    return 0.5 * (widest.lo + widest.hi)


def _taylor_quadratic_at(polys: ScaledPolys, k: float, s0: float) -> Poly:
    """The quadratic mu(s) - k*T(s) with T the Taylor model of sigma around s0.

    sigma and its derivatives come analytically from the variance quartic:
    sigma' = var'/(2 sigma) and sigma'' = (2 var var'' - var'^2)/(4 var^(3/2)).
    When the variance vanishes at the expansion point it is shifted right in
    steps of 0.1 up to ten times before giving up.
    """
    var, dvar = polys.var, polys.var.derivative()
    ddvar = dvar.derivative()
    for i in range(_MAX_SHIFTS + 1):
        s = s0 + _SHIFT_STEP * i
        v = polys.var_at(s)
        if v > _SIGMA_FLOOR * _SIGMA_FLOOR:
            sigma = math.sqrt(v)
            break
    else:
        raise ValueError("variance vanishes along path")
    d1 = dvar(s)
    d2 = ddvar(s)
    sig1 = d1 / (2.0 * sigma)
    sig2 = (2.0 * v * d2 - d1 * d1) / (4.0 * v * sigma)
    # k * (sigma + sig1*(s'-s) + sig2*(s'-s)^2/2) collected in powers of s'.
    t0 = sigma - sig1 * s + 0.5 * sig2 * s * s
    t1 = sig1 - sig2 * s
    t2 = 0.5 * sig2
    return polys.mu - Poly((k * t0, k * t1, k * t2))


def taylor_quadratic(problem: SurrogateProblem) -> Poly:
    """The surrogate's Taylor quadratic expanded at the problem's expansion point."""
    if problem.k == 0.0 or _variance_negligible(problem.polys):
        return problem.polys.mu
    return _taylor_quadratic_at(problem.polys, problem.k, problem.expansion_point)


def _component_expansion_point(comp: Interval, preferred: float) -> float:
    if comp.contains(preferred):
        return preferred
    if comp.is_unbounded:
        return comp.lo + 1.0
    return 0.5 * (comp.lo + comp.hi)


def solve_taylor(problem: SurrogateProblem) -> IntervalSet:
    """Piecewise solution of the Taylor surrogate over the problem domain.

    Since the surrogate implies mu(s) >= 0, the domain splits exactly into the
    connected components of that quadratic's solution set; sigma's Taylor model
    is only trustworthy locally, so each component is solved with its own
    expansion point (the problem's own point where it applies, the component
    midpoint elsewhere).  A single-interval mean constraint reduces to the
    single-expansion solve.
    """
    polys, k = problem.polys, problem.k
    mu_set = poly_nonneg_set(polys.mu, problem.domain)
    if k == 0.0 or _variance_negligible(polys) or mu_set.is_empty:
        return mu_set
    pieces: list[Interval] = []
    for comp in mu_set:
        s0 = _component_expansion_point(comp, problem.expansion_point)
        quad = _taylor_quadratic_at(polys, k, s0)
        pieces.extend(poly_nonneg_set(quad, comp).intervals)
    return IntervalSet.of(*pieces)


def solve_exact(problem: SurrogateProblem) -> IntervalSet:
    """Exact solution set of mu(s) - k*sigma(s) >= 0, via the squared quartic.

    The constraint is equivalent to mu >= 0 together with mu^2 >= k^2*var, the
    latter an exact quartic inequality.  An identically-zero quartic (a
    tangency artifact) falls back to mu >= 0 alone.
    """
    polys, k = problem.polys, problem.k
    base = poly_nonneg_set(polys.mu, problem.domain)
    if k == 0.0 or _variance_negligible(polys):
        return base
    quartic = polys.mu * polys.mu - (k * k) * polys.var
    scale = max(polys.mu.max_abs_coeff() ** 2, k * k * polys.var.max_abs_coeff())
    if quartic.is_zero or quartic.max_abs_coeff() <= 1e-14 * scale:
        return base
    return base.intersect(poly_nonneg_set(quartic, problem.domain))


def feasible_scales(problems: list[SurrogateProblem]) -> IntervalSet:
    """Intersection of the Taylor solution sets over all neighbor pairs."""
    if not problems:
        raise ValueError("need at least one pair problem")
    result = solve_taylor(problems[0])
    for p in problems[1:]:
        result = interval_intersect(result, solve_taylor(p))
    return result
