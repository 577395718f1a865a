import numpy as np
import pytest

from prvo.geometry import Gaussian2, Vec2
from prvo.moments import UncertainPair, margin_moments
from prvo.montecarlo import (
    draw_joint,
    empirical_eta,
    mc_moments,
    sample_gaussian2,
    substream,
)

from conftest import random_direction, random_pair


class TestSubstream:
    def test_reproducible(self):
        a = substream(7, "obs", 3, 1).standard_normal(8)
        b = substream(7, "obs", 3, 1).standard_normal(8)
        assert np.array_equal(a, b)

    def test_distinct_keys_differ(self):
        a = substream(7, "obs", 3, 1).standard_normal(8)
        b = substream(7, "obs", 3, 2).standard_normal(8)
        c = substream(7, "act", 3, 1).standard_normal(8)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestSampleGaussian2:
    def test_zero_covariance_collapses_to_mean(self):
        g = Gaussian2.point(Vec2(2.0, -1.0))
        draws = sample_gaussian2(g, substream(1), 100)
        assert np.allclose(draws, [2.0, -1.0])

    def test_diagonal_variances(self):
        g = Gaussian2(Vec2(0, 0), np.diag([1.0, 4.0]))
        draws = sample_gaussian2(g, substream(2), 100_000)
        var = draws.var(axis=0)
        assert var[0] == pytest.approx(1.0, rel=0.05)
        assert var[1] == pytest.approx(4.0, rel=0.05)

    def test_correlated_covariance(self):
        g = Gaussian2(Vec2(0, 0), np.array([[1.0, 0.5], [0.5, 1.0]]))
        draws = sample_gaussian2(g, substream(3), 100_000)
        corr = np.corrcoef(draws.T)[0, 1]
        assert corr == pytest.approx(0.5, abs=0.02)

    def test_mean_within_stderr_band(self):
        g = Gaussian2(Vec2(5.0, -3.0), np.diag([0.5, 0.25]))
        n = 50_000
        draws = sample_gaussian2(g, substream(4), n)
        err = np.abs(draws.mean(axis=0) - [5.0, -3.0])
        assert np.all(err <= 4.0 / np.sqrt(n) * np.sqrt([0.5, 0.25]))


class TestDrawJoint:
    def test_bit_identical_reproduction(self, rng):
        u = random_pair(rng)
        a = draw_joint(u, 1000, 99)
        b = draw_joint(u, 1000, 99)
        for name in ("pi", "pj", "vi", "vj", "actuation"):
            assert np.array_equal(getattr(a, name), getattr(b, name))


class TestEmpiricalEta:
    def deterministic_pair(self):
        return UncertainPair(
            pi=Gaussian2.point(Vec2(0, 0)),
            pj=Gaussian2.point(Vec2(10, 0)),
            vi=Gaussian2.point(Vec2(0, 0)),
            vj=Gaussian2.point(Vec2(0, 0)),
            actuation_cov=np.zeros((2, 2)),
            R=1.0,
        )

    def test_feasible_command_gives_one(self):
        est = empirical_eta(self.deterministic_pair(), Vec2(0, 1), 1000, substream(5))
        assert est.eta == 1.0
        assert est.degenerate == 0

    def test_infeasible_command_gives_zero(self):
        est = empirical_eta(self.deterministic_pair(), Vec2(1, 0), 1000, substream(6))
        assert est.eta == 0.0

    def test_degenerate_draws_counted_as_violations(self):
        # commanded velocity exactly cancels (vi + vj)/2 with no noise: w = 0
        u = UncertainPair(
            pi=Gaussian2.point(Vec2(0, 0)),
            pj=Gaussian2.point(Vec2(10, 0)),
            vi=Gaussian2.point(Vec2(1, 0)),
            vj=Gaussian2.point(Vec2(1, 0)),
            actuation_cov=np.zeros((2, 2)),
            R=1.0,
        )
        est = empirical_eta(u, Vec2(1, 0), 500, substream(7))
        assert est.degenerate == 500
        assert est.eta == 0.0

    def test_rejects_zero_samples(self, rng):
        with pytest.raises(ValueError):
            empirical_eta(random_pair(rng), Vec2(1, 0), 0, substream(8))


class TestMcMoments:
    def test_deterministic_inputs(self):
        u = UncertainPair(
            pi=Gaussian2.point(Vec2(0, 0)),
            pj=Gaussian2.point(Vec2(10, 0)),
            vi=Gaussian2.point(Vec2(1, 0)),
            vj=Gaussian2.point(Vec2(-1, 0)),
            actuation_cov=np.zeros((2, 2)),
            R=1.0,
        )
        mc = mc_moments(u, Vec2(1, 0), 1000, substream(9))
        assert mc.mean == pytest.approx(-4.0)
        assert mc.var == 0.0
        assert mc.stderr_mean == 0.0
        assert mc.stderr_var == 0.0

    def test_reproduces_worked_mean(self):
        u = UncertainPair(
            pi=Gaussian2.isotropic(Vec2(0, 0), 0.05),
            pj=Gaussian2.isotropic(Vec2(10, 0), 0.05),
            vi=Gaussian2.point(Vec2(1, 0)),
            vj=Gaussian2.point(Vec2(-1, 0)),
            actuation_cov=np.zeros((2, 2)),
            R=1.0,
        )
        mc = mc_moments(u, Vec2(1, 0), 100_000, substream(10))
        assert abs(mc.mean - (-3.6)) <= 3 * mc.stderr_mean
        assert abs(mc.var - 0.32) <= 3 * mc.stderr_var

    def test_stderr_scaling(self, rng):
        u = random_pair(rng)
        cmd = random_direction(rng)
        ratios = []
        for rep in range(8):
            a = mc_moments(u, cmd, 20_000, substream(11, rep))
            b = mc_moments(u, cmd, 40_000, substream(12, rep))
            ratios.append(b.stderr_mean / a.stderr_mean)
        assert np.mean(ratios) == pytest.approx(1 / np.sqrt(2), rel=0.10)

    def test_min_sample_count(self, rng):
        with pytest.raises(ValueError):
            mc_moments(random_pair(rng), Vec2(1, 0), 50, substream(13))

    def test_agrees_with_closed_form(self, rng):
        for i in range(30):
            u = random_pair(rng)
            cmd = random_direction(rng)
            mean, var = margin_moments(u, cmd)
            mc = mc_moments(u, cmd, 30_000, substream(14, i))
            assert abs(mean - mc.mean) <= 4 * max(mc.stderr_mean, 1e-12)
            assert abs(var - mc.var) <= 4 * max(mc.stderr_var, 1e-12)
