import math

import numpy as np
import pytest

from prvo.geometry import Interval, IntervalSet, Poly, quadratic_geq_zero
from prvo.moments import ScaledPolys, scaled_margin_polys
from prvo.montecarlo import empirical_eta, substream
from prvo.surrogate import (
    SurrogateProblem,
    cantelli_eta,
    cantelli_k,
    choose_expansion_point,
    feasible_scales,
    solve_exact,
    solve_taylor,
    taylor_quadratic,
)

from conftest import random_direction, random_pair

DOM = Interval(0.0, 2.0)


def problem(polys, k=1.0, domain=DOM):
    return SurrogateProblem(polys, k, domain, choose_expansion_point(polys, domain))


def random_problem(rng, k=1.0, pos_scale=0.01, vel_scale=0.004):
    u = random_pair(rng, pos_scale=pos_scale, vel_scale=vel_scale)
    d = random_direction(rng)
    return problem(scaled_margin_polys(u, d), k=k)


class TestCantelli:
    def test_known_values(self):
        assert cantelli_eta(1.0) == pytest.approx(0.5)
        assert cantelli_eta(0.0) == 0.0
        assert cantelli_eta(1.5) == pytest.approx(2.25 / 3.25)  # 0.6923...

    def test_inverse(self):
        assert cantelli_k(0.5) == pytest.approx(1.0)
        assert cantelli_k(0.0) == 0.0
        k = cantelli_k(0.8)
        assert k == pytest.approx(2.0)  # sqrt(0.8/0.2)
        assert cantelli_eta(k) == pytest.approx(0.8)

    def test_round_trips(self):
        for eta in np.linspace(0.0, 0.99, 100):
            assert cantelli_eta(cantelli_k(eta)) == pytest.approx(eta, abs=1e-12)

    def test_unreachable_confidence(self):
        with pytest.raises(ValueError, match="unreachable confidence"):
            cantelli_k(1.0)
        with pytest.raises(ValueError):
            cantelli_eta(-0.1)


class TestChooseExpansionPoint:
    def test_midpoint_of_feasible(self):
        polys = ScaledPolys(Poly((1.0, 0.0, -1.0)), Poly((0.0,)))
        assert choose_expansion_point(polys, Interval(0, 5)) == pytest.approx(0.5)

    def test_head_on_returns_zero(self):
        polys = ScaledPolys(Poly((0.0, 0.0, -4.0)), Poly((0.0,)))
        assert choose_expansion_point(polys, Interval(0, 5)) == pytest.approx(0.0)

    def test_roots_one_and_two(self):
        # -(s-1)(s-2) = -s^2 + 3s - 2, feasible on [1, 2]
        polys = ScaledPolys(Poly((-2.0, 3.0, -1.0)), Poly((0.0,)))
        assert choose_expansion_point(polys, Interval(0, 5)) == pytest.approx(1.5)

    def test_unbounded_widest_uses_lo_plus_one(self):
        polys = ScaledPolys(Poly((-2.0, 0.0, 1.0)), Poly((0.0,)))
        s = choose_expansion_point(polys, Interval(0.0, math.inf))
        assert s == pytest.approx(math.sqrt(2.0) + 1.0)

    def test_infeasible_argmax_interior(self):
        # mu = -(s-1)^2 - 1 is everywhere negative with argmax at 1
        polys = ScaledPolys(Poly((-2.0, 2.0, -1.0)), Poly((0.0,)))
        assert choose_expansion_point(polys, Interval(0, 5)) == pytest.approx(1.0)


class TestSolveTaylor:
    def test_deterministic_limit_ignores_k(self):
        polys = ScaledPolys(Poly((1.0, 0.0, -1.0)), Poly((0.0,)))
        assert solve_taylor(problem(polys, k=7.0)) == quadratic_geq_zero(-1, 0, 1, DOM)

    def test_k_zero_reduces_to_mean_constraint(self, rng):
        for _ in range(20):
            p = random_problem(rng, k=0.0)
            mu = p.polys.mu
            assert solve_taylor(p) == quadratic_geq_zero(
                mu.coeff(2), mu.coeff(1), mu.coeff(0), DOM
            )

    def test_taylor_model_matches_sigma_at_expansion_point(self, rng):
        for _ in range(30):
            p = random_problem(rng)
            model = p.polys.mu - taylor_quadratic(p)  # k * Taylor model of sigma
            s0 = p.expansion_point
            assert model(s0) == pytest.approx(p.k * p.polys.sigma_at(s0), rel=1e-9)

    def test_result_within_mean_constraint(self, rng):
        for _ in range(50):
            p = random_problem(rng)
            mu = p.polys.mu
            mu_set = quadratic_geq_zero(mu.coeff(2), mu.coeff(1), mu.coeff(0), DOM)
            assert mu_set.contains_set(solve_taylor(p), tol=1e-9)

    def test_variance_vanishes_error(self):
        # variance numerically nonzero but far below the sigma floor on the
        # whole shift range
        tiny = 1e-24
        var = Poly((0.0625 * tiny, -0.5 * tiny, 1.5 * tiny, -2.0 * tiny, tiny))
        polys = ScaledPolys(Poly((0.1,)), var)
        p = SurrogateProblem(polys, 1.0, Interval(0, 2), 0.0)
        with pytest.raises(ValueError, match="variance vanishes along path"):
            solve_taylor(p)


class TestSolveExact:
    def test_deterministic_limit(self):
        polys = ScaledPolys(Poly((1.0, 0.0, -1.0)), Poly((0.0,)))
        assert solve_exact(problem(polys, k=3.0)) == quadratic_geq_zero(-1, 0, 1, DOM)

    def test_constant_case(self):
        full = ScaledPolys(Poly((2.0,)), Poly((1.0,)))
        assert solve_exact(problem(full, k=1.0)) == IntervalSet.of(DOM)
        empty = ScaledPolys(Poly((2.0,)), Poly((9.0,)))
        assert solve_exact(problem(empty, k=1.0)).is_empty

    def test_grid_oracle(self, rng):
        for _ in range(60):
            p = random_problem(rng)
            sol = solve_exact(p)
            ss = np.linspace(DOM.lo, DOM.hi, 20_000)
            ends = sol.endpoints()
            for s in ss:
                if any(abs(s - e) < 1e-5 for e in ends):
                    continue
                val = p.polys.mu(s) - p.k * p.polys.sigma_at(s)
                assert (val >= 0) == sol.contains_point(s), (
                    f"mismatch at s={s}: val={val}, set={sol}"
                )

    def test_monotone_shrinkage_in_k(self, rng):
        for _ in range(40):
            u = random_pair(rng)
            d = random_direction(rng)
            polys = scaled_margin_polys(u, d)
            prev = None
            for k in (0.0, 0.5, 1.0, 1.5, 2.0):
                cur = solve_exact(problem(polys, k=k))
                if prev is not None:
                    assert prev.contains_set(cur, tol=1e-9)
                prev = cur

    def test_taylor_monotone_shrinkage_fixed_expansion(self, rng):
        for _ in range(40):
            u = random_pair(rng)
            d = random_direction(rng)
            polys = scaled_margin_polys(u, d)
            s0 = choose_expansion_point(polys, DOM)
            prev = None
            for k in (0.0, 0.5, 1.0, 1.5, 2.0):
                cur = solve_taylor(SurrogateProblem(polys, k, DOM, s0))
                if prev is not None:
                    assert prev.contains_set(cur, tol=1e-9)
                prev = cur

    def test_cantelli_soundness(self, rng):
        # any scale inside the exact surrogate set satisfies the chance
        # constraint at the Cantelli level, up to sampling error
        checked = 0
        for i in range(40):
            u = random_pair(rng)
            d = random_direction(rng)
            p = problem(scaled_margin_polys(u, d), k=1.0)
            sol = solve_exact(p)
            if sol.is_empty:
                continue
            iv = sol.widest()
            s = 0.5 * (iv.lo + min(iv.hi, DOM.hi))
            est = empirical_eta(u, d * s, 10_000, substream(777, i))
            assert est.eta >= cantelli_eta(1.0) - 0.02
            checked += 1
        assert checked >= 20


class TestFeasibleScales:
    def test_single_pair(self, rng):
        p = random_problem(rng)
        assert feasible_scales([p]) == solve_taylor(p)

    def test_intersection(self):
        a = ScaledPolys(Poly((0.0, 3.0, -1.5)), Poly((0.0,)))  # feasible [0, 2]
        b = ScaledPolys(Poly((-1.0, 2.0, -0.5)), Poly((0.0,)))  # roots at 2 +- sqrt2
        sa = solve_taylor(problem(a))
        sb = solve_taylor(problem(b))
        assert feasible_scales([problem(a), problem(b)]) == sa.intersect(sb)

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            feasible_scales([])
