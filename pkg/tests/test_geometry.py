"""Multi-indices, polar splitting, and the algebraic identity residuals."""

import math

import numpy as np
import pytest

from rieszlab.geometry import MultiIndex, decompose, identity_residuals


def test_multiindex_validation():
    with pytest.raises(ValueError):
        MultiIndex(())
    with pytest.raises(ValueError):
        MultiIndex((-1, 0))
    with pytest.raises(ValueError):
        MultiIndex((1.5,))
    mi = MultiIndex.of(2, 0, 1)
    assert mi.order == 3 and mi.dim == 3
    assert tuple(mi) == (2, 0, 1)


def test_multiindex_axis_and_add():
    assert MultiIndex.axis(3, 2, axis=1).entries == (0, 3)
    with pytest.raises(ValueError):
        MultiIndex.axis(1, 2, axis=2)
    total = MultiIndex.of(1, 2) + MultiIndex.of(0, 3)
    assert total.entries == (1, 5)
    with pytest.raises(ValueError):
        MultiIndex.of(1) + MultiIndex.of(1, 0)


def test_log_factorial_against_lgamma():
    rng = np.random.default_rng(2)
    for _ in range(50):
        entries = tuple(int(e) for e in rng.integers(0, 30, size=rng.integers(1, 4)))
        mi = MultiIndex(entries)
        want = sum(math.lgamma(e + 1) for e in entries)
        assert mi.log_factorial() == pytest.approx(want, abs=1e-12)


def test_log_factorial_ratio_large_entries():
    rng = np.random.default_rng(4)
    for _ in range(50):
        base = tuple(int(e) for e in rng.integers(0, 10_000, size=2))
        step = tuple(int(e) for e in rng.integers(0, 4, size=2))
        b, s = MultiIndex(base), MultiIndex(step)
        got = b.log_factorial_ratio(s)
        want = (b + s).log_factorial() - b.log_factorial()
        # lgamma differencing loses digits at 1e4; the ratio form must not
        assert got == pytest.approx(want, rel=1e-10, abs=1e-8)
    with pytest.raises(ValueError):
        MultiIndex.of(1).log_factorial_ratio(MultiIndex.of(1, 0))


def test_decompose_reconstruction():
    rng = np.random.default_rng(9)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        x = rng.normal(size=n)
        while np.linalg.norm(x) < 1e-3:
            x = rng.normal(size=n)
        y = rng.normal(size=n) * math.exp(rng.uniform(-2, 2))
        d = decompose(x, y)
        np.testing.assert_allclose(d.y_parallel + d.y_perp, y, atol=1e-12)
        assert abs(float(np.dot(d.y_perp, x))) < 1e-10
        np.testing.assert_allclose(d.y_parallel, d.r0 * x, atol=1e-12)
        assert 0.0 <= d.theta <= math.pi
        # r0 recovers the projection coefficient
        assert d.r0 == pytest.approx(float(np.dot(x, y)) / float(np.dot(x, x)))


def test_decompose_degenerate_inputs():
    with pytest.raises(ValueError):
        decompose(np.zeros(2), np.ones(2))
    d = decompose(np.array([1.0, 0.0]), np.zeros(2))
    assert d.theta == 0.0 and d.r0 == 0.0


def test_identity_residuals_tiny():
    rng = np.random.default_rng(17)
    for n in (1, 2, 3):
        res = identity_residuals(rng, n, 4000)
        assert set(res) == {"exponent", "peak_split", "peak_distance", "gap_slack"}
        assert res["exponent"] <= 1e-12
        assert res["peak_split"] <= 1e-12
        assert res["peak_distance"] <= 1e-12
        assert res["gap_slack"] >= 1.0
