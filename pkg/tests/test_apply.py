"""Tests for the transform apply path: excised ladder, split, support sums."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from rieszlab import MultiIndex
from rieszlab.apply import (
    GridFunction,
    PVConfig,
    apply_glob,
    apply_glob_log,
    apply_loc,
    apply_loc_log,
    apply_riesz,
    apply_riesz_log,
    ball_indicator,
)
from rieszlab.hermite import gamma_h
from rieszlab.kernels import riesz_kernel
from rieszlab.quadrature import NonConvergenceError, QuadratureConfig

RADIUS = 8.5


def gaussian_fn(n: int) -> GridFunction:
    """Normalized Gaussian as a GridFunction with an analytic evaluator.

    This is the lowest member of the expansion family, so the transform of
    it has a closed form through the coefficient ladder.
    """

    def evaluator(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return math.pi ** (-0.5 * n) * np.exp(-np.sum(pts * pts, axis=1))

    return GridFunction(
        n=n,
        points=np.empty((0, n)),
        values=np.empty(0),
        evaluator=evaluator,
        support_center=np.zeros(n),
        support_radius=RADIUS,
    )


class TestValidation:
    def test_needs_evaluator(self):
        f = GridFunction(n=1, points=np.zeros((1, 1)), values=np.ones(1))
        with pytest.raises(ValueError):
            apply_riesz(MultiIndex.of(1), f, np.array([0.5]))

    def test_dimension_mismatch(self):
        f = gaussian_fn(2)
        with pytest.raises(ValueError):
            apply_riesz(MultiIndex.of(1), f, np.array([0.5, 0.5]))

    def test_order_zero_rejected(self):
        f = gaussian_fn(1)
        with pytest.raises(ValueError):
            apply_riesz(MultiIndex.of(0), f, np.array([0.5]))

    def test_even_order_on_support_rejected(self):
        # components all even: the excised limit misses a diagonal term,
        # so the pointwise path refuses anywhere near the support
        f = gaussian_fn(1)
        with pytest.raises(ValueError):
            apply_riesz(MultiIndex.of(2), f, np.array([0.5]))

    def test_dimension_three_excised_not_implemented(self):
        f = gaussian_fn(3)
        with pytest.raises(NotImplementedError):
            apply_riesz(MultiIndex.of(1, 0, 0), f, np.array([0.5, 0.0, 0.0]))

    def test_pv_config_validation(self):
        with pytest.raises(ValueError):
            PVConfig(epsilon=0.0)
        with pytest.raises(ValueError):
            PVConfig(levels=1)
        with pytest.raises(ValueError):
            PVConfig(rel_tol=0.0)


class TestCoefficientLadderOracle:
    """The transform of the lowest family member has a closed form: the
    order-1 transform maps it to -sqrt(2) times the next member, and the
    general factor is (-1)^|a| 2^{|a|/2} sqrt((b+a)!/b!) (|b|+n)^{-|a|/2}."""

    def test_order_one_dimension_one(self):
        f = gaussian_fn(1)
        alpha = MultiIndex.of(1)
        for x in (0.5, 1.0, 2.0):
            got = apply_riesz(alpha, f, np.array([x]))
            want = -math.sqrt(2.0) * gamma_h(alpha, np.array([x])).to_float()
            assert abs(got - want) <= 1e-5 * abs(want)

    def test_order_three_dimension_one(self):
        f = gaussian_fn(1)
        got = apply_riesz(MultiIndex.of(3), f, np.array([0.5]))
        factor = -2.0 * math.sqrt(2.0) * math.sqrt(6.0)
        want = factor * gamma_h(MultiIndex.of(3), np.array([0.5])).to_float()
        assert abs(got - want) <= 1e-6 * abs(want)

    def test_mixed_order_dimension_two(self):
        f = gaussian_fn(2)
        # (1,0): factor -2^{1/2} * sqrt(1) * 2^{-1/2} = -1
        got = apply_riesz(MultiIndex.of(1, 0), f, np.array([0.7, -0.3]))
        want = -1.0 * gamma_h(MultiIndex.of(1, 0), np.array([0.7, -0.3])).to_float()
        assert abs(got - want) <= 5e-4 * abs(want)

    def test_order_two_mixed_dimension_two(self):
        f = gaussian_fn(2)
        # (1,1): factor (+1) * 2 * sqrt(1) * 2^{-1} = 1
        alpha = MultiIndex.of(1, 1)
        for pt in ([0.4, 0.9], [-1.2, 0.5]):
            got = apply_riesz(alpha, f, np.array(pt))
            want = gamma_h(alpha, np.array(pt)).to_float()
            assert abs(got - want) <= 5e-4 * abs(want)


class TestSplit:
    def test_local_plus_global_matches_full(self):
        # the three modes share quadrature nodes, so the split must add
        # back at rounding accuracy, not just quadrature accuracy
        f = gaussian_fn(1)
        alpha = MultiIndex.of(1)
        x = np.array([0.8])
        full = apply_riesz(alpha, f, x)
        loc = apply_loc(alpha, f, x)
        glob = apply_glob(alpha, f, x)
        assert abs(loc + glob - full) <= 1e-12 * abs(full)

    def test_far_point_is_purely_global(self):
        # x far outside the support: the cutoff vanishes on all of supp(f)
        f = gaussian_fn(1)
        alpha = MultiIndex.of(1)
        x = np.array([9.5])
        loc = apply_loc_log(alpha, f, x)
        glob = apply_glob_log(alpha, f, x)
        full = apply_riesz_log(alpha, f, x)
        assert loc.sign == 0
        assert glob.sign == full.sign
        assert glob.logmag == full.logmag


class TestClearancePath:
    def test_even_order_off_support_matches_direct_quadrature(self):
        # far from the support the even-order guard does not apply; the
        # support sum must match a scalar adaptive quadrature of the same
        # truncated integral (log-shifted so floats stay representable)
        f = gaussian_fn(1)
        alpha = MultiIndex.of(2)
        x = np.array([9.5])
        got = apply_riesz_log(alpha, f, x)
        shift = 9.5**2

        def integrand(y: float) -> float:
            kv = riesz_kernel(alpha, x, np.array([y]))
            fy = math.pi**-0.5 * math.exp(-y * y)
            return kv.value.sign * math.exp(kv.value.logmag + shift) * fy

        want, err = quad(integrand, -RADIUS, RADIUS, limit=300, epsrel=1e-11)
        assert err <= 1e-9 * abs(want)
        assert abs(got.sign * math.exp(got.logmag + shift) - want) <= 1e-9 * abs(want)

    def test_tight_tolerance_config_agrees(self):
        f = gaussian_fn(1)
        alpha = MultiIndex.of(1)
        x = np.array([9.5])
        base = apply_riesz_log(alpha, f, x)
        fine = apply_riesz_log(alpha, f, x, cfg=QuadratureConfig(rel_tol=1e-13))
        assert base.sign == fine.sign
        assert abs(base.logmag - fine.logmag) <= 1e-6


class TestLadderFailure:
    def test_coarse_ladder_raises(self):
        # two levels cannot support the eps-log model at a tolerance this
        # tight, so the disagreement check must fire
        f = gaussian_fn(1)
        pv = PVConfig(epsilon=0.4, levels=2, rel_tol=1e-9)
        with pytest.raises(NonConvergenceError) as info:
            apply_riesz(MultiIndex.of(1), f, np.array([0.5]), pv=pv)
        assert info.value.subdivisions == 2


class TestBallIndicator:
    def test_evaluator_and_support(self):
        f = ball_indicator(2, [1.0, 0.0], 0.5)
        pts = np.array([[1.0, 0.0], [1.4, 0.0], [1.6, 0.0], [1.0, 0.49]])
        np.testing.assert_allclose(f.evaluator(pts), [1.0, 1.0, 0.0, 1.0])
        assert f.support_radius == 0.5
        np.testing.assert_allclose(f.support_center, [1.0, 0.0])

    def test_radius_validation(self):
        with pytest.raises(ValueError):
            ball_indicator(1, [0.0], 0.0)
