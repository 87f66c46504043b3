"""Adaptive panel quadrature against closed-form integrals."""

import math

import pytest

from rieszlab.logscaled import LogScaled
from rieszlab.quadrature import (
    NonConvergenceError,
    QuadratureConfig,
    integrate01,
    integrate01_with_info,
)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=0)
    with pytest.raises(ValueError):
        QuadratureConfig(substitution="nope")
    cfg = QuadratureConfig().with_substitution("neg_log")
    assert cfg.substitution == "neg_log"


def test_constant_and_polynomial():
    cfg = QuadratureConfig()
    one = integrate01(lambda r: LogScaled.one(), cfg)
    assert one.to_float() == pytest.approx(1.0, rel=1e-13)
    sq = integrate01(lambda r: LogScaled.from_float(r * r), cfg)
    assert sq.to_float() == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_endpoint_singularities():
    cfg = QuadratureConfig()
    # r^{-1/2}: integrable blow-up at 0
    val = integrate01(lambda r: LogScaled.from_log(-0.5 * math.log(r)), cfg)
    assert val.to_float() == pytest.approx(2.0, rel=1e-9)
    # r^{-0.9} is near the non-integrable edge
    val = integrate01(lambda r: LogScaled.from_log(-0.9 * math.log(r)), cfg)
    assert val.to_float() == pytest.approx(10.0, rel=1e-8)
    # (1-r)^{-1/2}: same at the right endpoint, where float spacing near 1
    # caps how far bisection can chase the singular sliver
    val = integrate01(lambda r: LogScaled.from_log(-0.5 * math.log1p(-r)), cfg)
    assert val.to_float() == pytest.approx(2.0, rel=1e-7)


def test_gamma_half_oracle():
    # int_0^1 (-log r)^{-1/2} dr = Gamma(1/2) = sqrt(pi)
    cfg = QuadratureConfig()

    def integrand(r: float) -> LogScaled:
        # panel nodes can round onto either endpoint, where -log r is 0 or
        # inf; both are measure-zero and integrable, so report zero there
        if r <= 0.0 or r >= 1.0:
            return LogScaled.zero()
        return LogScaled.from_log(-0.5 * math.log(-math.log(r)))

    val = integrate01(integrand, cfg)
    assert val.to_float() == pytest.approx(math.sqrt(math.pi), rel=1e-7)


def test_substitutions_agree():
    # one integrand, three parametrizations; sharp interior peak
    def f(r: float) -> LogScaled:
        return LogScaled.from_log(-((r - 0.3) ** 2) * 400.0)

    values = []
    for name in ("identity", "neg_log", "one_minus_exp"):
        cfg = QuadratureConfig(substitution=name)
        values.append(integrate01(f, cfg).to_float())
    assert values[1] == pytest.approx(values[0], rel=1e-9)
    assert values[2] == pytest.approx(values[0], rel=1e-9)


def test_signed_integrand():
    # int_0^1 sin(2 pi r) cancels exactly; halves agree in magnitude
    def f(r: float) -> LogScaled:
        return LogScaled.from_float(math.sin(2.0 * math.pi * r))

    cfg = QuadratureConfig()
    left = integrate01(f, cfg, 0.0, 0.5).to_float()
    right = integrate01(f, cfg, 0.5, 1.0).to_float()
    assert left == pytest.approx(1.0 / math.pi, rel=1e-12)
    assert right == pytest.approx(-1.0 / math.pi, rel=1e-12)


def test_subinterval_bounds_checked():
    cfg = QuadratureConfig()
    with pytest.raises(ValueError):
        integrate01(lambda r: LogScaled.one(), cfg, 0.5, 0.5)
    with pytest.raises(ValueError):
        integrate01(lambda r: LogScaled.one(), cfg, -0.1, 1.0)


def test_nonconvergence_reports_state():
    cfg = QuadratureConfig(rel_tol=1e-14, max_subdivisions=2)
    with pytest.raises(NonConvergenceError) as info:
        integrate01(lambda r: LogScaled.from_log(-0.95 * math.log(r)), cfg)
    assert info.value.subdivisions >= 1
    assert math.isfinite(info.value.err_logmag)


def test_info_reports_effort():
    cfg = QuadratureConfig()
    val, info = integrate01_with_info(
        lambda r: LogScaled.from_log(-0.5 * math.log(r)), cfg
    )
    assert info.subdivisions >= 1
    # reported error is consistent with the requested relative tolerance
    assert info.err_logmag <= val.logmag + math.log(1e-8)
