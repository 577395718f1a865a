import numpy as np
import pytest

from prvo.geometry import Gaussian2, Vec2
from prvo.moments import UncertainPair, scaled_margin_polys
from prvo.rvo import (
    PairGeometry,
    RobotState,
    rvo_margin,
    rvo_margin_poly,
    scaled_margin_quadratic,
    step_integrator,
)


def geom(r, R, vi, vj, vrvo):
    return PairGeometry(r=Vec2(*r), R=R, vi=Vec2(*vi), vj=Vec2(*vj), vrvo=Vec2(*vrvo))


class TestRvoMargin:
    def test_collision_course(self):
        # w = (2, 0); f = 100 - 400/4 - 1 = -1
        g = geom((10, 0), 1.0, (1, 0), (-1, 0), (1, 0))
        assert rvo_margin(g) == pytest.approx(-1.0)

    def test_perpendicular_escape(self):
        g = geom((10, 0), 1.0, (0, 0), (0, 0), (0, 1))
        assert rvo_margin(g) == pytest.approx(99.0)

    def test_touching_head_on(self):
        # ||r|| = R and w parallel to r: f = R^2 - R^2 - R^2 = -R^2
        g = geom((2, 0), 2.0, (0, 0), (0, 0), (1, 0))
        assert rvo_margin(g) == pytest.approx(-4.0)

    def test_degenerate_relative_velocity(self):
        g = geom((10, 0), 1.0, (1, 0), (1, 0), (1, 0))
        with pytest.raises(ValueError, match="degenerate relative velocity"):
            rvo_margin(g)

    def test_reciprocity_symmetry(self, rng):
        # swapping roles with the reciprocal partner velocity negates w and
        # leaves the margin invariant; constructing the partner velocity in
        # floats rounds, so the comparison carries a 1-ulp-scale tolerance
        for _ in range(200):
            r = Vec2(*rng.uniform(-5, 5, 2))
            vi = Vec2(*rng.uniform(-2, 2, 2))
            vj = Vec2(*rng.uniform(-2, 2, 2))
            vrvo = Vec2(*rng.uniform(-2, 2, 2))
            g = PairGeometry(r=r, R=0.8, vi=vi, vj=vj, vrvo=vrvo)
            other = PairGeometry(r=-r, R=0.8, vi=vj, vj=vi, vrvo=vi + vj - vrvo)
            if g.w().norm() < 1e-4:
                continue
            assert rvo_margin(g) == pytest.approx(rvo_margin(other), rel=1e-9, abs=1e-9)

    def test_scale_covariance_exact(self):
        g = geom((10, 0), 1.0, (1, 0), (-1, 0), (1, 0))
        lam, mu = 2.0, 4.0  # powers of two keep float scaling exact
        scaled = geom((20, 0), 2.0, (4, 0), (-4, 0), (4, 0))
        assert rvo_margin(scaled) == lam * lam * rvo_margin(g)


class TestRvoMarginPoly:
    def test_matches_worked_example(self):
        g = geom((10, 0), 1.0, (1, 0), (-1, 0), (1, 0))
        # F = 100*4 - 400 - 1*4 = -4, same sign as f = -1
        assert rvo_margin_poly(g) == pytest.approx(-4.0)

    def test_total_at_zero_w(self):
        g = geom((10, 0), 1.0, (1, 0), (1, 0), (1, 0))
        assert rvo_margin_poly(g) == 0.0

    def test_sign_agreement_randomized(self, rng):
        checked = 0
        while checked < 100_000:
            n = 100_000 - checked
            r = rng.uniform(-8, 8, (n, 2))
            vi = rng.uniform(-2, 2, (n, 2))
            vj = rng.uniform(-2, 2, (n, 2))
            vrvo = rng.uniform(-2, 2, (n, 2))
            R = rng.uniform(0.2, 2.0, n)
            w = 2 * vrvo - vi - vj
            wn2 = np.einsum("ij,ij->i", w, w)
            keep = wn2 > 1e-6  # ||w|| > 1e-3
            rn2 = np.einsum("ij,ij->i", r, r)
            rw = np.einsum("ij,ij->i", r, w)
            f = rn2 - rw**2 / wn2 - R**2
            F = rn2 * wn2 - rw**2 - R**2 * wn2
            assert np.all(np.sign(f[keep]) == np.sign(F[keep]))
            checked += int(np.count_nonzero(keep))


class TestStepIntegrator:
    def test_euler_step(self):
        s = RobotState(Vec2(0, 0), Vec2(0, 0), 0.5)
        out = step_integrator(s, Vec2(1, 2), 0.5)
        assert out.position == Vec2(0.5, 1.0)
        assert out.velocity == Vec2(1, 2)
        assert out.radius == 0.5

    def test_zero_velocity(self):
        s = RobotState(Vec2(3, 4), Vec2(1, 1), 0.5)
        assert step_integrator(s, Vec2(0, 0), 2.0).position == Vec2(3, 4)

    def test_two_half_steps_equal_one(self):
        s = RobotState(Vec2(1, 1), Vec2(0, 0), 0.5)
        v = Vec2(0.25, -0.5)
        twice = step_integrator(step_integrator(s, v, 0.1), v, 0.1)
        once = step_integrator(s, v, 0.2)
        assert twice.position.x == pytest.approx(once.position.x)
        assert twice.position.y == pytest.approx(once.position.y)

    def test_rejects_nonpositive_dt(self):
        s = RobotState(Vec2(0, 0), Vec2(0, 0), 0.5)
        with pytest.raises(ValueError):
            step_integrator(s, Vec2(1, 0), 0.0)


class TestScaledMarginQuadratic:
    def test_head_on_is_minus_four_s_squared(self):
        p = scaled_margin_quadratic(Vec2(10, 0), 1.0, Vec2(1, 0), Vec2(-1, 0), Vec2(1, 0))
        assert p.coeffs == (0.0, 0.0, -4.0)

    def test_matches_moment_engine_at_zero_covariance(self, rng):
        for _ in range(50):
            r = Vec2(*rng.uniform(1.0, 6.0, 2))
            vi = Vec2(*rng.uniform(-1, 1, 2))
            vj = Vec2(*rng.uniform(-1, 1, 2))
            d = Vec2(*rng.uniform(-1, 1, 2))
            if d.norm() < 0.1:
                continue
            pair = UncertainPair(
                pi=Gaussian2.point(Vec2(0, 0)),
                pj=Gaussian2.point(r),
                vi=Gaussian2.point(vi),
                vj=Gaussian2.point(vj),
                actuation_cov=np.zeros((2, 2)),
                R=0.7,
            )
            direct = scaled_margin_quadratic(r, 0.7, vi, vj, d)
            via_moments = scaled_margin_polys(pair, d)
            assert via_moments.var.is_zero
            for s in (-1.0, 0.0, 0.5, 1.7):
                assert direct(s) == pytest.approx(via_moments.mu(s), rel=1e-9, abs=1e-9)
