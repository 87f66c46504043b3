"""Eigenbasis expansions and the coefficient-space transform."""

import math

import numpy as np
import pytest

from rieszlab.geometry import MultiIndex
from rieszlab.hermite import gamma_h, h_normalized
from rieszlab.spectral import (
    SpectralCoefficients,
    analyze,
    apply_frac_power,
    apply_riesz_spectral,
    l2_norm_bound,
    orthonormality_defect,
    riesz_coefficient_factor,
    synthesize,
    total_degree_indices,
)


def _mixture_evaluator(n, terms):
    def f(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        gauss = math.pi ** (-0.5 * n) * np.exp(-np.sum(pts * pts, axis=1))
        out = np.zeros(pts.shape[0])
        for coeff, beta in terms:
            out += coeff * np.asarray(h_normalized(beta, pts), dtype=float)
        return out * gauss

    def quotient(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0])
        for coeff, beta in terms:
            out += coeff * np.asarray(h_normalized(beta, pts), dtype=float)
        return out * math.pi ** (-0.5 * n)

    return f, quotient


def test_total_degree_indices_counts():
    idx = total_degree_indices(2, 3)
    assert len(idx) == 10  # C(2+3, 2)
    assert len(set(idx)) == 10
    assert all(sum(b) <= 3 for b in idx)
    assert total_degree_indices(1, 0) == [(0,)]


def test_orthonormality_defect_small():
    assert orthonormality_defect(1, 10) <= 1e-10
    assert orthonormality_defect(2, 8) <= 1e-9


def test_analyze_recovers_mixture_coefficients():
    terms = [(0.7, MultiIndex.of(0)), (-0.2, MultiIndex.of(3))]
    f, quotient = _mixture_evaluator(1, terms)
    c = analyze(f, 1, max_degree=6, gaussian_quotient=quotient)
    assert c.coefficient((0,)) == pytest.approx(0.7, abs=1e-12)
    assert c.coefficient((3,)) == pytest.approx(-0.2, abs=1e-12)
    assert abs(c.coefficient((1,))) < 1e-12
    assert c.norm() == pytest.approx(math.sqrt(0.49 + 0.04), rel=1e-12)


def test_analyze_pointwise_quotient_matches_explicit():
    terms = [(0.5, MultiIndex.of(1, 1))]
    f, quotient = _mixture_evaluator(2, terms)
    explicit = analyze(f, 2, max_degree=4, gaussian_quotient=quotient)
    pointwise = analyze(f, 2, max_degree=4)
    for beta in total_degree_indices(2, 4):
        assert pointwise.coefficient(beta) == pytest.approx(
            explicit.coefficient(beta), abs=1e-10
        )


def test_analyze_legendre_backend_agrees():
    terms = [(1.0, MultiIndex.of(2))]
    f, quotient = _mixture_evaluator(1, terms)
    hermite = analyze(f, 1, max_degree=5, gaussian_quotient=quotient)
    legendre = analyze(
        f, 1, max_degree=5, order=160, backend="legendre",
        support=(np.array([-8.5]), np.array([8.5])),
    )
    for beta in total_degree_indices(1, 5):
        assert legendre.coefficient(beta) == pytest.approx(
            hermite.coefficient(beta), abs=1e-9
        )


def test_analyze_warns_when_truncation_is_tight():
    terms = [(1.0, MultiIndex.of(6))]
    f, quotient = _mixture_evaluator(1, terms)
    with pytest.warns(UserWarning):
        analyze(f, 1, max_degree=6, gaussian_quotient=quotient)


def test_synthesize_round_trip():
    rng = np.random.default_rng(3)
    terms = [(0.8, MultiIndex.of(0, 1)), (0.3, MultiIndex.of(2, 0))]
    f, quotient = _mixture_evaluator(2, terms)
    c = analyze(f, 2, max_degree=5, gaussian_quotient=quotient)
    pts = rng.uniform(-2.0, 2.0, size=(30, 2))
    np.testing.assert_allclose(synthesize(c, pts), f(pts), atol=1e-12)


def test_coefficients_validation_and_text_round_trip():
    with pytest.raises(ValueError):
        SpectralCoefficients(n=1, max_degree=1, coeffs={(2,): 1.0})
    with pytest.raises(ValueError):
        SpectralCoefficients(n=1, max_degree=1, coeffs={(0, 0): 1.0})
    c = SpectralCoefficients(n=2, max_degree=2, coeffs={(1, 1): -0.25, (0, 0): 2.0})
    back = SpectralCoefficients.from_text(c.to_text())
    assert back.n == 2 and back.coeffs == c.coeffs


def test_apply_frac_power_scalings():
    c = SpectralCoefficients(n=1, max_degree=3, coeffs={(0,): 1.0, (3,): 2.0})
    same = apply_frac_power(c, 0.0)
    assert same.coeffs == c.coeffs
    half = apply_frac_power(c, 0.5)
    assert half.coefficient((0,)) == pytest.approx(1.0)
    assert half.coefficient((3,)) == pytest.approx(2.0 / 2.0)  # (3+1)^{-1/2} = 1/2
    with pytest.raises(ValueError):
        apply_frac_power(c, -1.0)


def test_derivative_ladder_sign_and_magnitude():
    # d/dx (gauss h_k) = -sqrt(2(k+1)) gauss h_{k+1}; checked by central
    # differences, which pins the ladder sign the transform inherits
    h = 1e-5
    rng = np.random.default_rng(5)
    for k in range(5):
        beta = MultiIndex.of(k)
        up = MultiIndex.of(k + 1)
        for _ in range(5):
            x = float(rng.uniform(-2.0, 2.0))
            fd = (
                gamma_h(beta, np.array([x + h])).to_float()
                - gamma_h(beta, np.array([x - h])).to_float()
            ) / (2.0 * h)
            want = -math.sqrt(2.0 * (k + 1)) * gamma_h(up, np.array([x])).to_float()
            assert fd == pytest.approx(want, rel=1e-7, abs=1e-10)


def test_derivative_ladder_in_two_dimensions():
    h = 1e-5
    beta = MultiIndex.of(1, 2)
    up = MultiIndex.of(2, 2)
    x = np.array([0.6, -1.1])
    e = np.array([h, 0.0])
    fd = (gamma_h(beta, x + e).to_float() - gamma_h(beta, x - e).to_float()) / (2 * h)
    want = -math.sqrt(2.0 * 2) * gamma_h(up, x).to_float()
    assert fd == pytest.approx(want, rel=1e-7)


def test_riesz_coefficient_factor_values():
    # beta = 0, n = 1: order 1 gives -sqrt(2), order 2 gives +2 sqrt(2)
    assert riesz_coefficient_factor(
        MultiIndex.of(0), MultiIndex.of(1)
    ) == pytest.approx(-math.sqrt(2.0), rel=1e-14)
    assert riesz_coefficient_factor(
        MultiIndex.of(0), MultiIndex.of(2)
    ) == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-14)
    # general entry matches the ladder-over-eigenvalue composition
    beta, alpha = MultiIndex.of(3, 1), MultiIndex.of(1, 0)
    want = -math.sqrt(2.0 * 4) / math.sqrt(4 + 2)
    assert riesz_coefficient_factor(beta, alpha) == pytest.approx(want, rel=1e-14)
    with pytest.raises(ValueError):
        riesz_coefficient_factor(MultiIndex.of(0), MultiIndex.of(0))


def test_apply_riesz_spectral_shifts_degrees():
    c = SpectralCoefficients(n=2, max_degree=1, coeffs={(0, 0): 1.0, (1, 0): 0.5})
    out = apply_riesz_spectral(c, MultiIndex.of(1, 1))
    assert out.max_degree == 3
    assert set(out.coeffs) == {(1, 1), (2, 1)}
    want00 = riesz_coefficient_factor(MultiIndex.of(0, 0), MultiIndex.of(1, 1))
    assert out.coefficient((1, 1)) == pytest.approx(want00, rel=1e-14)
    with pytest.raises(ValueError):
        apply_riesz_spectral(c, MultiIndex.of(1))


def test_l2_norm_bound_closed_forms():
    first = l2_norm_bound(MultiIndex.of(1), 1, 10_000)
    assert abs(first.value - math.sqrt(2.0)) <= 1e-12
    assert first.argmax == (0,) and first.sup_located
    second = l2_norm_bound(MultiIndex.of(2), 1, 10_000)
    assert abs(second.value - math.sqrt(8.0)) <= 1e-12
    assert second.argmax == (0,) and second.sup_located
    # the balanced two-dimensional case peaks at 1 on every even shell
    cross = l2_norm_bound(MultiIndex.of(1, 1), 2, 200)
    assert cross.value == pytest.approx(1.0, abs=1e-12)
    assert cross.argmax == (0, 0) and cross.sup_located
    with pytest.raises(ValueError):
        l2_norm_bound(MultiIndex.of(1), 2, 10)
    with pytest.raises(ValueError):
        l2_norm_bound(MultiIndex.of(1, 0, 0), 3, 500)
