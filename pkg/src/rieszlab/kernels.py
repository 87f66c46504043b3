"""Heat, negative-power, and Riesz-transform kernels of the inverse-Gaussian
Laplacian, evaluated off the diagonal in the log domain.

All kernels are one-dimensional integrals over r in (0, 1) after the change
of variable r = e^{-t}.  Two algebraically equal forms of the Riesz integrand
are kept:

  direct    ... H_alpha(u) exp(-|x - r y|^2 / (1 - r^2)),
  factored  ... H_alpha(u) exp(-|r x - y|^2 / (1 - r^2)),

with u = (x - r y)/sqrt(1 - r^2); the factored form carries the constant
exp(-|x|^2 + |y|^2) outside the integral.  The direct form is the default on
the near-diagonal region, the factored one in the global region where the
outside constant is the quantity of interest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from rieszlab.geometry import MultiIndex
from rieszlab.hermite import hermite1d, hermite_multi
from rieszlab.logscaled import LogScaled, log_sum, signed_logsumexp
from rieszlab.quadrature import QuadratureConfig, integrate01, integrate01_with_info
from rieszlab.regions import in_N

__all__ = [
    "KernelValue",
    "heat_kernel",
    "frac_power_kernel",
    "riesz_integrand",
    "riesz_kernel",
    "riesz_kernel_batch",
    "kernel_gradient",
]

FORMS = ("direct", "factored")

# default splitting point between the two endpoint substitutions
_SPLIT = 0.5


@dataclass(frozen=True)
class KernelValue:
    value: LogScaled
    form: str
    subdivisions: int
    err_logmag: float


def heat_kernel(t: float, x: np.ndarray, y: np.ndarray) -> LogScaled:
    """Mehler-type heat kernel at time t > 0, with respect to Lebesgue
    measure in y.  Integrates to 1 in y and to e^{-n t} in x."""
    if t <= 0:
        raise ValueError("time must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    decay = -math.expm1(-2.0 * t)  # 1 - e^{-2t}, accurate for small t
    diff = x - math.exp(-t) * y
    logmag = (
        -n * t
        - 0.5 * n * math.log(math.pi)
        - 0.5 * n * math.log(decay)
        - float(np.dot(diff, diff)) / decay
    )
    return LogScaled.from_log(logmag)


def _log_one_minus_r2(r: float) -> float:
    return math.log1p(-r) + math.log1p(r)


def frac_power_kernel(
    b: float, x: np.ndarray, y: np.ndarray, cfg: QuadratureConfig | None = None
) -> LogScaled:
    """Kernel of the negative power (order b > 0) of the operator.

    Off the diagonal for any b; on the diagonal the r-integral only converges
    when 2 b > n, and the call is rejected otherwise.
    """
    if b <= 0:
        raise ValueError("power must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if np.array_equal(x, y) and 2.0 * b <= n:
        raise ValueError(f"kernel diverges at x = y for 2b = {2 * b:g} <= n = {n}")
    cfg = cfg or QuadratureConfig()

    def integrand(r: float) -> LogScaled:
        one_m_r2 = (1.0 - r) * (1.0 + r)
        diff = x - r * y
        logmag = (
            (n - 1) * math.log(r)
            + (b - 1.0) * math.log(-math.log(r))
            - 0.5 * n * _log_one_minus_r2(r)
            - float(np.dot(diff, diff)) / one_m_r2
        )
        return LogScaled.from_log(logmag)

    left = integrate01(integrand, cfg.with_substitution("neg_log"), 0.0, _SPLIT)
    right = integrate01(integrand, cfg.with_substitution("one_minus_exp"), _SPLIT, 1.0)
    scale = LogScaled.from_log(-math.lgamma(b) - 0.5 * n * math.log(math.pi))
    return scale * log_sum([left, right])


def riesz_integrand(
    alpha: MultiIndex, r: float, x: np.ndarray, y: np.ndarray, form: str = "direct"
) -> LogScaled:
    """Integrand of the Riesz kernel at radius r, without the constant
    prefactor; the factored form also omits the outside exp(-|x|^2 + |y|^2).

    At any fixed r the direct and factored values differ exactly by that
    constant."""
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}")
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie strictly inside (0, 1)")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    order = alpha.order
    one_m_r2 = (1.0 - r) * (1.0 + r)
    scale = math.sqrt(one_m_r2)
    u = (x - r * y) / scale
    if form == "direct":
        exponent = -float(np.dot(u, u))
    else:
        w = r * x - y
        exponent = -float(np.dot(w, w)) / one_m_r2
    h = hermite_multi(alpha, u)
    if h == 0.0:
        return LogScaled.zero()
    logmag = (
        (n - 1) * math.log(r)
        + (0.5 * order - 1.0) * math.log(-math.log(r))
        - 0.5 * (n + order) * _log_one_minus_r2(r)
        + math.log(abs(h))
        + exponent
    )
    return LogScaled.from_log(logmag, 1 if h > 0 else -1)


def _riesz_prefactor(n: int, order: int) -> LogScaled:
    sign = -1 if order % 2 else 1
    return LogScaled.from_log(
        -math.lgamma(0.5 * order) - 0.5 * n * math.log(math.pi), sign
    )


def riesz_kernel(
    alpha: MultiIndex,
    x: np.ndarray,
    y: np.ndarray,
    form: str = "auto",
    cfg: QuadratureConfig | None = None,
) -> KernelValue:
    """Riesz-transform kernel of order alpha at an off-diagonal pair.

    form "auto" picks direct on the near-diagonal region (scale-2 local set)
    and factored in the global region.  The two forms agree to quadrature
    tolerance; only the bookkeeping of the outside constant differs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if alpha.dim != x.size or x.size != y.size:
        raise ValueError("dimension mismatch between alpha, x, y")
    if alpha.order < 1:
        raise ValueError("order must be at least 1")
    if float(np.linalg.norm(x - y)) == 0.0:
        raise ValueError("kernel undefined on the diagonal")
    if form == "auto":
        form = "direct" if in_N(2.0, x, y) else "factored"
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}")
    cfg = cfg or QuadratureConfig()

    def f(r: float) -> LogScaled:
        return riesz_integrand(alpha, r, x, y, form)

    left, info_l = integrate01_with_info(f, cfg.with_substitution("neg_log"), 0.0, _SPLIT)
    right, info_r = integrate01_with_info(
        f, cfg.with_substitution("one_minus_exp"), _SPLIT, 1.0
    )
    total = _riesz_prefactor(x.size, alpha.order) * log_sum([left, right])
    if form == "factored":
        total = total * LogScaled.from_log(-float(np.dot(x, x)) + float(np.dot(y, y)))
    return KernelValue(
        value=total,
        form=form,
        subdivisions=info_l.subdivisions + info_r.subdivisions,
        err_logmag=max(info_l.err_logmag, info_r.err_logmag),
    )


# ---------------------------------------------------------------------------
# vectorized fixed-rule evaluation for parameter sweeps


_T_EDGES = (math.log(2.0), 1.2, 2.0, 4.0, 8.0, 16.0, 32.0, 60.0)
_V_EDGES = (math.log(2.0), 1.1, 1.6, 2.2, 3.0, 4.0, 5.5, 8.0, 12.0, 18.0, 28.0, 45.0)
_BATCH_ORDER = 24


@lru_cache(maxsize=32)
def _batch_rule(n: int, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Composite nodes (r, 1/sqrt(1-r^2), log weight incl. all r-factors)."""
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(_BATCH_ORDER)
    rs, inv_scales, logws = [], [], []
    for edges, side in ((_T_EDGES, "t"), (_V_EDGES, "v")):
        for a, b in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            s = mid + half * gl_nodes
            w = gl_weights * half
            if side == "t":
                r = np.exp(-s)
                one_m_r2 = -np.expm1(-2.0 * s)
                log_base = (
                    -n * s
                    + (0.5 * order - 1.0) * np.log(s)
                    - 0.5 * (n + order) * np.log(one_m_r2)
                )
            else:
                r = -np.expm1(-s)
                neg_log_r = -np.log1p(-np.exp(-s))
                one_m_r2 = np.exp(-s) * (1.0 + r)
                log_base = (
                    (n - 1) * np.log(r)
                    + (0.5 * order - 1.0) * np.log(neg_log_r)
                    - 0.5 * (n + order) * np.log(one_m_r2)
                    - s
                )
            rs.append(r)
            inv_scales.append(1.0 / np.sqrt(one_m_r2))
            logws.append(log_base + np.log(w))
    return np.concatenate(rs), np.concatenate(inv_scales), np.concatenate(logws)


def _hermite_batch(k: int, u: np.ndarray) -> np.ndarray:
    if k == 0:
        return np.ones_like(u)
    if k == 1:
        return 2.0 * u
    if k == 2:
        return 4.0 * u * u - 2.0
    if k == 3:
        return u * (8.0 * u * u - 12.0)
    if k == 4:
        u2 = u * u
        return 16.0 * u2 * u2 - 48.0 * u2 + 12.0
    return np.asarray(hermite1d(k, u))


def riesz_kernel_batch(
    alpha: MultiIndex, X: np.ndarray, Y: np.ndarray, chunk: int = 4096
) -> tuple[np.ndarray, np.ndarray]:
    """Riesz kernel over many pairs at once on a fixed composite rule.

    Parameters
    ----------
    X, Y : arrays of shape (m, n) with rows pairwise off-diagonal; the fixed
        rule resolves separations down to about 1e-8.

    Returns
    -------
    (signs, logmags) arrays of shape (m,).  Agreement with the adaptive
    scalar path is at quadrature tolerance; this path exists for sweeps.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape != Y.shape or X.shape[1] != alpha.dim:
        raise ValueError("shape mismatch between alpha, X, Y")
    n, order = X.shape[1], alpha.order
    if order < 1:
        raise ValueError("order must be at least 1")
    r, inv_s, logw = _batch_rule(n, order)
    pref = _riesz_prefactor(n, order)
    m = X.shape[0]
    signs = np.empty(m, dtype=int)
    logmags = np.empty(m, dtype=float)
    for start in range(0, m, chunk):
        xb = X[start : start + chunk]
        yb = Y[start : start + chunk]
        u = (xb[:, None, :] - r[None, :, None] * yb[:, None, :]) * inv_s[None, :, None]
        usq = np.sum(u * u, axis=2)
        h_sign = np.ones_like(usq)
        h_logmag = np.zeros_like(usq)
        for j, k in enumerate(alpha):
            if k == 0:
                continue
            hv = _hermite_batch(k, u[:, :, j])
            h_sign = h_sign * np.sign(hv)
            with np.errstate(divide="ignore"):
                h_logmag = h_logmag + np.log(np.abs(hv))
        term_log = h_logmag + logw[None, :] - usq
        term_log = np.where(h_sign == 0.0, -np.inf, term_log)
        sgn, lm = signed_logsumexp(term_log, h_sign, axis=1)
        signs[start : start + chunk] = sgn * pref.sign
        logmags[start : start + chunk] = lm + pref.logmag
    return signs, logmags


def kernel_gradient(
    alpha: MultiIndex,
    x: np.ndarray,
    y: np.ndarray,
    fd_scale: float = 1e-4,
) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference kernel gradients in x and y.

    Step scales with the separation, which is the only relevant length on
    the near-diagonal region where this is used.  Values must be within
    float range; that holds on the local region where |y|^2 - |x|^2 is
    uniformly bounded.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    h = fd_scale * float(np.linalg.norm(x - y))
    if h == 0.0:
        raise ValueError("diagonal pair")
    pairs_x, pairs_y = [], []
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        pairs_x.extend([(x + e, y), (x - e, y)])
        pairs_y.extend([(x, y + e), (x, y - e)])
    all_pairs = pairs_x + pairs_y
    X = np.array([p[0] for p in all_pairs])
    Y = np.array([p[1] for p in all_pairs])
    signs, logmags = riesz_kernel_batch(alpha, X, Y)
    vals = signs * np.exp(logmags)
    gx = (vals[0 : 2 * n : 2] - vals[1 : 2 * n : 2]) / (2.0 * h)
    gy = (vals[2 * n :: 2] - vals[2 * n + 1 :: 2]) / (2.0 * h)
    return gx, gy
