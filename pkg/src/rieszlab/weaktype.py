"""Weak-type (1,1) experiments: level-set measures, comparison-kernel catalog,
bound-ratio sweeps, and the tube counterexample with growth-rate fitting.

Everything size-sensitive runs in the log domain.  The reference measure has
density pi^{n/2} e^{|x|^2}, so measures of sets sitting at distance R from
the origin carry a factor e^{R^2}; quasi-norms sup_s s * measure{|Tf| > s}
pair such a factor against the matching e^{-R^2} decay of Tf, and only the
polynomial remainder survives.  Floats appear at the very end, after that
cancellation.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from rieszlab.apply import GridFunction
from rieszlab.geometry import MultiIndex
from rieszlab.kernels import riesz_kernel_batch
from rieszlab.logscaled import LogScaled, signed_logsumexp
from rieszlab.regions import sample_global_pairs, sample_local_pairs

__all__ = [
    "gamma_inv_ball_log",
    "gamma_inv_measure",
    "gamma_inv_measure_mc",
    "LevelSetReport",
    "level_set_report",
    "LemmaKernelSpec",
    "lemma_kernel_eval",
    "lemma_kernel_batch",
    "near_diagonal_profile_integral",
    "window_gaussian_integral_log",
    "SweepResult",
    "bound_ratio_sweep",
    "BOUND_REGISTRY",
    "resolve_registry_key",
    "run_bound_sweep",
    "run_all_bound_sweeps",
    "CZLocalResult",
    "czlocal_supremum",
    "QuasinormProbe",
    "weak_quasinorm_probe",
    "rank_one_quasinorm_exact",
    "rank_one_growth_probe",
    "CounterexampleConfig",
    "CounterexampleResult",
    "counterexample_expectation",
    "counterexample_lower_bound",
    "tube_axis_basis",
    "tube_membership",
    "tube_kernel_lower_constant",
    "SlopeFit",
    "slope_fit",
    "write_counterexample_report",
]

_LOG_PI = math.log(math.pi)
# constant in the comparison-kernel exponents; valid because 1-r^2 <= 2(1-r)
_EXPONENT_C = 0.5
# constant in the peak-block exponents: on the window |r-r0| < (1-r0)/2 the
# integration variable u = 1-r reaches 3(1-r0)/2, so a block stated with
# e^{-c'|y_perp|^2/(1-r0)} dominates the integrand only for c' <= 2c/3;
# 1/4 leaves margin
_BLOCK_C = 0.25


# --------------------------------------------------------------------------
# measures for the density pi^{n/2} e^{|x|^2}


def _log_sphere_factor(n: int, t: np.ndarray) -> np.ndarray:
    """log of the surface integral of e^{2 r |c| cos(angle)} over directions.

    t = 2 r |c| >= 0.  n=1 sums the two endpoints, n=2 integrates the circle
    (a Bessel I0 profile), n=3 the sphere (sinh(t)/t profile).
    """
    t = np.asarray(t, dtype=float)
    if n == 1:
        return t + np.log1p(np.exp(-2.0 * t))
    if n == 2:
        return t + np.log(special.i0e(t)) + math.log(2.0 * math.pi)
    if n == 3:
        small = t < 1e-12
        safe = np.where(small, 1.0, t)
        body = np.where(
            small, 0.0, np.log(-np.expm1(-2.0 * safe)) - np.log(2.0 * safe)
        )
        return t + body + math.log(4.0 * math.pi)
    raise NotImplementedError("sphere factor implemented for n <= 3")


def gamma_inv_ball_log(
    n: int, center, radius: float, panels: int = 8, order: int = 32
) -> LogScaled:
    """Inverse-Gaussian measure of the ball B(center, radius), log domain.

    Radial Gauss-Legendre panels against the closed-form direction integral,
    so the quadrature is one-dimensional no matter the dimension.
    """
    center = np.asarray(center, dtype=float).reshape(n)
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    c = float(np.linalg.norm(center))
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, radius, panels + 1)
    mids, halves = 0.5 * (edges[:-1] + edges[1:]), 0.5 * np.diff(edges)
    r = (mids[:, None] + halves[:, None] * gl_nodes[None, :]).reshape(-1)
    logw = np.log(halves[:, None] * gl_weights[None, :]).reshape(-1)
    log_terms = (
        0.5 * n * _LOG_PI
        + (n - 1) * np.log(r)
        + _log_sphere_factor(n, 2.0 * r * c)
        + c * c
        + r * r
        + logw
    )
    sgn, lm = signed_logsumexp(log_terms[None, :], axis=1)
    return LogScaled.from_log(float(lm[0]), int(sgn[0]))


def _log_gauss_sq_cells(edges: np.ndarray) -> np.ndarray:
    """log of int_a^b e^{u^2} du for consecutive edge pairs, overflow-free.

    Uses int_0^x e^{u^2} du = e^{x^2} dawsn(x), odd in x, so each antiderivative
    value is carried as a sign and a log magnitude.
    """
    edges = np.asarray(edges, dtype=float)
    mag = np.abs(edges)
    with np.errstate(divide="ignore"):
        log_f = mag * mag + np.log(special.dawsn(mag))
    sign_f = np.sign(edges)
    pair_logs = np.stack([log_f[1:], log_f[:-1]], axis=1)
    pair_signs = np.stack([sign_f[1:], -sign_f[:-1]], axis=1)
    sgn, lm = signed_logsumexp(pair_logs, pair_signs, axis=1)
    if np.any(sgn <= 0):
        raise ValueError("edges must be strictly increasing")
    return lm


def _log_radial_ball_measure(n: int, t: np.ndarray) -> np.ndarray:
    """log of the measure of the centered ball of radius t, closed form.

    n=1 uses the imaginary error function with its large-argument expansion;
    n=2 is elementary.  Only these two dimensions have radial probes.
    """
    t = np.asarray(t, dtype=float)
    if n == 1:
        out = np.empty_like(t)
        small = t < 25.0
        out[small] = np.log(special.erfi(t[small]))
        big = t[~small]
        out[~small] = big * big - np.log(big * math.sqrt(math.pi)) + np.log1p(
            0.5 / (big * big) + 0.75 / (big * big * big * big)
        )
        return _LOG_PI + out
    if n == 2:
        with np.errstate(divide="ignore"):
            return 2.0 * _LOG_PI + t * t + np.log(-np.expm1(-t * t))
    raise NotImplementedError("closed-form radial measure implemented for n <= 2")


def gamma_inv_measure(
    n: int,
    member: Callable[[np.ndarray], np.ndarray],
    box,
    resolution: int = 256,
    warn_tol: float = 0.01,
) -> LogScaled:
    """Measure of {member} inside the bounding box by midpoint masking.

    Runs at the given resolution and at double resolution; when the two
    disagree by more than warn_tol relatively, a resolution warning is
    emitted.  The doubled-resolution value is returned.
    """
    box = np.asarray(box, dtype=float).reshape(n, 2)
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("box must have positive extent on every axis")

    def run(res: int) -> LogScaled:
        axes, logdx = [], 0.0
        for j in range(n):
            lo, hi = box[j]
            dx = (hi - lo) / res
            axes.append(lo + dx * (np.arange(res) + 0.5))
            logdx += math.log(dx)
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.reshape(-1) for g in grids], axis=-1)
        mask = np.asarray(member(pts), dtype=bool)
        if not np.any(mask):
            return LogScaled.zero()
        live = pts[mask]
        logs = 0.5 * n * _LOG_PI + np.sum(live * live, axis=1) + logdx
        sgn, lm = signed_logsumexp(logs[None, :], axis=1)
        return LogScaled.from_log(float(lm[0]), int(sgn[0]))

    coarse = run(resolution)
    fine = run(2 * resolution)
    if fine.sign != 0 and coarse.sign != 0:
        drift = abs(math.expm1(coarse.logmag - fine.logmag))
    else:
        drift = 0.0 if fine.sign == coarse.sign else 1.0
    if drift > warn_tol:
        warnings.warn(
            f"measure moved by {drift:.2%} when doubling resolution "
            f"{resolution}; increase resolution",
            RuntimeWarning,
            stacklevel=2,
        )
    return fine


def gamma_inv_measure_mc(
    n: int,
    member: Callable[[np.ndarray], np.ndarray],
    box,
    samples: int = 200_000,
    rng: np.random.Generator | None = None,
    table: int = 4096,
) -> tuple[LogScaled, float]:
    """Monte-Carlo measure with importance density proportional to e^{x^2}
    per coordinate; returns (measure, relative standard error).

    This is the estimator of record for n = 3, where tensor grids at useful
    resolutions do not fit.
    """
    rng = rng or np.random.default_rng(0)
    box = np.asarray(box, dtype=float).reshape(n, 2)
    pts = np.empty((samples, n))
    log_density = np.zeros(samples)
    log_z_total = 0.0
    for j in range(n):
        lo, hi = box[j]
        edges = np.linspace(lo, hi, table + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        dx = (hi - lo) / table
        cell_logw = mids * mids + math.log(dx)
        shift = float(np.max(cell_logw))
        probs = np.exp(cell_logw - shift)
        log_z = shift + math.log(float(np.sum(probs)))
        probs /= np.sum(probs)
        idx = rng.choice(table, size=samples, p=probs)
        u = rng.uniform(size=samples)
        x = edges[idx] + u * dx
        pts[:, j] = x
        # density within cell idx is exp(mid^2)/Z_axis; weight = e^{x^2}/density
        log_density += mids[idx] * mids[idx] - log_z
        log_z_total += log_z
    mask = np.asarray(member(pts), dtype=bool)
    if not np.any(mask):
        return LogScaled.zero(), 0.0
    log_weights = np.where(
        mask, np.sum(pts * pts, axis=1) - log_density, -np.inf
    )
    shift = float(np.max(log_weights))
    w = np.exp(log_weights - shift)
    mean = float(np.mean(w))
    se = float(np.std(w) / math.sqrt(samples))
    log_value = 0.5 * n * _LOG_PI + shift + math.log(mean)
    return LogScaled.from_log(log_value, 1), se / mean


# --------------------------------------------------------------------------
# super-level sets


@dataclass
class LevelSetReport:
    """Level-set summary of one sampled |Tf|.

    Thresholds and measures are stored as logs; the quasi-norm is
    sup_s s * measure{|Tf| > s} divided by the input norm.  Metadata records
    how the estimate was produced (cell counts, truncation).
    """

    log_thresholds: np.ndarray
    log_measures: np.ndarray
    log_quasi_norm: float
    log_f_norm: float
    argmax_log_threshold: float
    metadata: dict = field(default_factory=dict)

    @property
    def thresholds(self) -> np.ndarray:
        return np.exp(self.log_thresholds)

    @property
    def measures(self) -> np.ndarray:
        return np.exp(self.log_measures)

    @property
    def quasi_norm(self) -> float:
        return _exp_safe(self.log_quasi_norm)

    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.log_measures) <= 1e-12))


def level_set_report(
    tf: GridFunction,
    f_norm: float | LogScaled = 1.0,
    s_grid: np.ndarray | None = None,
    metadata: dict | None = None,
) -> LevelSetReport:
    """Measure the super-level sets of |Tf| over its sampled cells.

    tf must carry cell_volumes (each sample owns a Lebesgue cell); the
    density weight e^{|x|^2} is applied at the sample point.  Thresholds
    default to 64 log-spaced values over six decades below max|Tf|.
    """
    if tf.cell_volumes is None:
        raise ValueError("level sets need cell_volumes on the sampled grid")
    log_f = f_norm.logmag if isinstance(f_norm, LogScaled) else math.log(f_norm)
    if tf.log_abs_values is not None:
        log_tf = tf.log_abs_values.copy()
    else:
        with np.errstate(divide="ignore"):
            log_tf = np.log(np.abs(tf.values))
    meta = dict(metadata or {})
    meta.setdefault("cells", int(log_tf.size))
    top = float(np.max(log_tf)) if log_tf.size else -math.inf
    if top == -math.inf:
        return LevelSetReport(
            log_thresholds=np.empty(0),
            log_measures=np.empty(0),
            log_quasi_norm=-math.inf,
            log_f_norm=log_f,
            argmax_log_threshold=-math.inf,
            metadata=meta,
        )
    if s_grid is None:
        log_s = np.linspace(top - 6.0 * math.log(10.0), top, 64)
    else:
        log_s = np.log(np.asarray(s_grid, dtype=float))
    log_mass = (
        np.log(tf.cell_volumes)
        + 0.5 * tf.n * _LOG_PI
        + np.sum(tf.points * tf.points, axis=1)
    )
    order = np.argsort(log_tf)
    sorted_tf = log_tf[order]
    sorted_mass = log_mass[order]
    # suffix[k] = log-sum of masses with |Tf| ranked k..end
    suffix = np.full(sorted_mass.size + 1, -np.inf)
    suffix[:-1] = np.logaddexp.accumulate(sorted_mass[::-1])[::-1]
    pos = np.searchsorted(sorted_tf, log_s, side="right")
    log_measures = suffix[pos]
    log_pairs = log_s + log_measures
    best = int(np.argmax(log_pairs))
    return LevelSetReport(
        log_thresholds=log_s,
        log_measures=log_measures,
        log_quasi_norm=float(log_pairs[best]) - log_f,
        log_f_norm=log_f,
        argmax_log_threshold=float(log_s[best]),
        metadata=meta,
    )


# --------------------------------------------------------------------------
# comparison-kernel catalog


_KERNEL_IDS = ("L41", "L42", "L43", "L44", "K1a", "K2a")
_K2A_PIECES = ("full", "near", "mid", "edge")


@dataclass(frozen=True)
class LemmaKernelSpec:
    """One comparison kernel from the boundedness analysis.

    L41..L44 are the four weak-(1,1) kernels, each carrying the shared
    inverse-Gaussian factor e^{-|x|^2+|y|^2}; K1a and K2a are the bare
    radial-integral pieces of the kernel decomposition (no shared factor),
    with K2a splittable into its near/mid/edge regions via `piece`
    (compound ids like "K2a-near" are accepted and normalized).  The regime
    flag records whether the parameters satisfy the boundedness hypotheses;
    "inside" is validated for L42 (mu + nu >= n - 2 and mu <= n), while
    "outside" deliberately allows anything so unboundedness probes can be
    expressed.
    """

    kernel_id: str
    n: int
    mu: float = 0.0
    nu: float = 0.0
    delta: float = 1.0
    a: int = 0
    piece: str = "full"
    regime: str = "inside"

    def __post_init__(self):
        kid, piece = self.kernel_id, self.piece
        if kid.startswith("K2a-"):
            kid, piece = "K2a", kid.split("-", 1)[1]
            object.__setattr__(self, "kernel_id", kid)
            object.__setattr__(self, "piece", piece)
        if kid not in _KERNEL_IDS:
            raise ValueError(f"unknown kernel id {self.kernel_id!r}")
        if piece not in _K2A_PIECES:
            raise ValueError(f"unknown piece {piece!r}")
        if kid != "K2a" and piece != "full":
            raise ValueError("pieces apply to K2a only")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.regime not in ("inside", "outside"):
            raise ValueError("regime must be 'inside' or 'outside'")
        if kid in ("L43", "L44") and self.delta <= 0.0:
            raise ValueError("delta must be positive")
        if self.a < 0:
            raise ValueError("a must be nonnegative")
        if kid == "L42" and self.regime == "inside":
            if self.mu + self.nu < self.n - 2.0 - 1e-12 or self.mu > self.n + 1e-12:
                raise ValueError(
                    "inside regime needs mu + nu >= n - 2 and mu <= n; "
                    "flag regime='outside' to probe beyond the hypotheses"
                )


def _polar_batch(x: np.ndarray, Y: np.ndarray):
    """Per-row split of Y relative to the ray through x.

    Returns (r0, |y_perp|^2, sin(angle), |y|) with the convention that the
    angle is 0 at y = 0.
    """
    x = np.asarray(x, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    x2 = float(np.dot(x, x))
    if x2 == 0.0:
        raise ValueError("cannot decompose relative to x = 0")
    xy = Y @ x
    r0 = xy / x2
    yperp_sq = np.maximum(np.sum(Y * Y, axis=1) - r0 * r0 * x2, 0.0)
    y_norm = np.linalg.norm(Y, axis=1)
    sin_theta = np.where(y_norm > 0.0, np.sqrt(yperp_sq) / np.maximum(y_norm, 1e-300), 0.0)
    return r0, yperp_sq, sin_theta, y_norm


def _log_min_growth_angular(n: int, x_norm: float, sin_theta: np.ndarray) -> np.ndarray:
    """log of min((1+|x|)^n, (|x| sin(angle))^{-n})."""
    grow = n * math.log1p(x_norm)
    with np.errstate(divide="ignore"):
        ang = -n * (math.log(x_norm) + np.log(sin_theta))
    return np.minimum(grow, ang)


_GL12 = np.polynomial.legendre.leggauss(12)
_GL64 = np.polynomial.legendre.leggauss(64)


def _first_half_integral_log(
    n: int, a: int, x: np.ndarray, Y: np.ndarray
) -> np.ndarray:
    """Bare integral over r in (0, 1/2): r^{n-1} |x - r y|^a e^{-|r x - y|^2}."""
    nodes, weights = _GL64
    r = 0.25 + 0.25 * nodes
    logw = np.log(0.25 * weights)
    x2 = float(np.dot(x, x))
    xy = Y @ x
    y2 = np.sum(Y * Y, axis=1)
    # |rx - y|^2 and |x - ry|^2 expanded to avoid an (m, nodes, n) tensor
    rxy = r[None, :] * r[None, :] * x2 - 2.0 * r[None, :] * xy[:, None] + y2[:, None]
    terms = (n - 1) * np.log(r)[None, :] + logw[None, :] - rxy
    if a > 0:
        xry = x2 - 2.0 * r[None, :] * xy[:, None] + r[None, :] * r[None, :] * y2[:, None]
        with np.errstate(divide="ignore"):
            terms = terms + 0.5 * a * np.log(np.maximum(xry, 0.0))
    _, lm = signed_logsumexp(terms, axis=1)
    return lm


def _second_half_panels(u_min: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/log-weights on u in (u_min, 1/2), geometric toward u = 0."""
    nodes, weights = _GL12
    edges = [0.5]
    while edges[-1] > u_min:
        edges.append(edges[-1] * 0.5)
    us, ws = [], []
    for hi, lo in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        us.append(mid + half * nodes)
        ws.append(np.log(half * weights))
    return np.concatenate(us), np.concatenate(ws)


_U_NODES, _U_LOGW = _second_half_panels()


def _second_half_integral_log(
    n: int, a: int, x: np.ndarray, Y: np.ndarray, piece: str
) -> np.ndarray:
    """Bare integral over r in (1/2, 1) of the sharp-peak piece.

    Integrand (with u = 1 - r):
        |x - r y|^a * u^{-(n+a+2)/2} * exp(-c[(r - r0)^2 |x|^2 + |y_perp|^2]/u)
    restricted to the requested region of r relative to the peak at r0.
    """
    x = np.asarray(x, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    r0, yperp_sq, _, _ = _polar_batch(x, Y)
    x2 = float(np.dot(x, x))
    xy = Y @ x
    y2 = np.sum(Y * Y, axis=1)
    u = _U_NODES
    r = 1.0 - u
    xry = x2 - 2.0 * r[None, :] * xy[:, None] + r[None, :] * r[None, :] * y2[:, None]
    expo = (
        -_EXPONENT_C
        * ((r[None, :] - r0[:, None]) ** 2 * x2 + yperp_sq[:, None])
        / u[None, :]
    )
    terms = expo - 0.5 * (n + a + 2) * np.log(u)[None, :] + _U_LOGW[None, :]
    if a > 0:
        with np.errstate(divide="ignore"):
            terms = terms + 0.5 * a * np.log(np.maximum(xry, 0.0))
    if piece != "full":
        below = r0[:, None] < 1.0
        s = 1.0 - r0[:, None]
        near = below & (np.abs(r[None, :] - r0[:, None]) < 0.5 * s)
        edge_lo = below & (u[None, :] <= 0.5 * s)
        mid_lo = below & (r[None, :] < 0.5 * (3.0 * r0[:, None] - 1.0))
        mid_hi = ~below & (u[None, :] > 1.5 * (r0[:, None] - 1.0))
        edge_hi = ~below & ~mid_hi
        if piece == "near":
            mask = near
        elif piece == "mid":
            mask = mid_lo | mid_hi
        else:
            mask = edge_lo | edge_hi
        terms = np.where(mask, terms, -np.inf)
    _, lm = signed_logsumexp(terms, axis=1)
    return lm


def lemma_kernel_batch(spec: LemmaKernelSpec, x, Y) -> np.ndarray:
    """log kernel values for one x against rows of Y (all kernels are >= 0)."""
    x = np.asarray(x, dtype=float).reshape(spec.n)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[1] != spec.n:
        raise ValueError("Y has the wrong dimension")
    n = spec.n
    x_norm = float(np.linalg.norm(x))
    y2 = np.sum(Y * Y, axis=1)
    base = -x_norm * x_norm + y2
    kid = spec.kernel_id
    if kid == "K1a":
        return _first_half_integral_log(n, spec.a, x, Y)
    if kid == "K2a":
        return _second_half_integral_log(n, spec.a, x, Y, spec.piece)
    if kid == "L42":
        with np.errstate(divide="ignore"):
            radial = -spec.mu * math.log(x_norm) if x_norm > 0 else math.inf
        return base + radial - spec.nu * math.log1p(x_norm)
    r0, yperp_sq, sin_theta, y_norm = _polar_batch(x, Y)
    if kid == "L41":
        return base + _log_min_growth_angular(n, x_norm, sin_theta)
    if kid == "L43":
        sep = np.linalg.norm(Y - x, axis=1)
        in_global = sep * (1.0 + x_norm + y_norm) > 1.0
        mask = in_global & (y_norm <= 2.0 * x_norm)
        with np.errstate(divide="ignore"):
            shape = (n - 1) * (np.log(y_norm) - math.log(x_norm)) if n > 1 else 0.0
        vals = base - spec.delta * yperp_sq + math.log(x_norm) + shape
        return np.where(mask, vals, -np.inf)
    # L44: the collapsed-peak kernel on the aligned sector
    dpar = np.abs(1.0 - r0) * x_norm
    ypar = np.abs(r0) * x_norm
    mask = (x_norm * dpar >= 1.0) & (ypar >= x_norm / 3.0) & (ypar < x_norm)
    with np.errstate(divide="ignore"):
        vals = (
            base
            + 0.5 * (n + 1) * math.log(x_norm)
            - 0.5 * (n - 1) * np.log(dpar)
            - spec.delta * yperp_sq * x_norm / np.maximum(dpar, 1e-300)
        )
    return np.where(mask, vals, -np.inf)


def lemma_kernel_eval(spec: LemmaKernelSpec, x, y) -> LogScaled:
    """Single-pair kernel value as a log-scaled number."""
    lm = float(lemma_kernel_batch(spec, x, np.atleast_2d(y))[0])
    if lm == -math.inf:
        return LogScaled.zero()
    return LogScaled.from_log(lm, 1)


def near_diagonal_profile_integral(
    n: int, mu: float, nu: float, x, y
) -> float:
    """log of int_0^1 |x - r y|^nu (1 - r^2)^{-(n+mu)/2} e^{-|x-ry|^2/(1-r^2)} dr.

    The r -> 1 end is resolved by geometric panels in u = 1 - r; the
    exponential factor keeps the integral finite whenever x != y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x2, y2, xy = float(x @ x), float(y @ y), float(x @ y)

    def chunk_log(r: np.ndarray, logw: np.ndarray) -> np.ndarray:
        xry = np.maximum(x2 - 2.0 * r * xy + r * r * y2, 0.0)
        s2 = (1.0 - r) * (1.0 + r)
        terms = -0.5 * (n + mu) * np.log(s2) - xry / s2 + logw
        if nu != 0.0:
            with np.errstate(divide="ignore"):
                terms = terms + 0.5 * nu * np.log(xry)
        return terms

    nodes, weights = _GL64
    r_lo = 0.25 + 0.25 * nodes
    lo_terms = chunk_log(r_lo, np.log(0.25 * weights))
    hi_terms = chunk_log(1.0 - _U_NODES, _U_LOGW)
    all_terms = np.concatenate([lo_terms, hi_terms])
    _, lm = signed_logsumexp(all_terms[None, :], axis=1)
    return float(lm[0])


# --------------------------------------------------------------------------
# sharp-peak building blocks of the kernel decomposition


def _log_block_a(n: int, a: int, x_norm: float, r0, yperp_sq) -> np.ndarray:
    """log of the peak-window block
    (1-r0)^{-(n-a+1)/2} |x|^{a-1} e^{-c'|y_perp|^2/(1-r0)} min(1, |x| sqrt(1-r0))
    with the reduced block constant c'.
    """
    r0 = np.asarray(r0, dtype=float)
    yperp_sq = np.asarray(yperp_sq, dtype=float)
    s = 1.0 - r0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            -0.5 * (n - a + 1) * np.log(s)
            + (a - 1) * math.log(x_norm)
            - _BLOCK_C * yperp_sq / s
            + np.minimum(0.0, math.log(x_norm) + 0.5 * np.log(s))
        )
    return np.where(s > 0.0, out, -np.inf)


def _log_block_b(n: int, a: int, x_norm: float, r0, yperp_sq) -> np.ndarray:
    """log of the perpendicular block
    (1-r0)^{-(n+a+2)/2} |y_perp|^a e^{-c'|y_perp|^2/(1-r0)}
        min(sqrt(1-r0)/|x|, 1-r0)
    with the reduced block constant c'.
    """
    r0 = np.asarray(r0, dtype=float)
    yperp_sq = np.asarray(yperp_sq, dtype=float)
    s = 1.0 - r0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            -0.5 * (n + a + 2) * np.log(s)
            - _BLOCK_C * yperp_sq / s
            + np.minimum(0.5 * np.log(s) - math.log(x_norm), np.log(s))
        )
        if a > 0:
            out = out + 0.5 * a * np.log(yperp_sq)
    return np.where(s > 0.0, out, -np.inf)


def window_gaussian_integral_log(x_norm: float, r0: float) -> float:
    """log of int over |r - r0| < (1-r0)/2 of e^{-c |x|^2 (r-r0)^2/(1-r0)} dr.

    Closed form via the error function: sqrt(pi/q) erf(sqrt(q) h) with
    q = c|x|^2/(1-r0), h = (1-r0)/2.
    """
    s = 1.0 - r0
    if s <= 0.0 or x_norm <= 0.0:
        raise ValueError("needs r0 < 1 and x != 0")
    q = _EXPONENT_C * x_norm * x_norm / s
    z = math.sqrt(q) * 0.5 * s
    return 0.5 * (_LOG_PI - math.log(q)) + math.log(float(special.erf(z)))


# --------------------------------------------------------------------------
# bound-ratio sweeps


@dataclass
class SweepResult:
    """Max ratio of a target expression to its claimed bound over samples.

    The sample is prefix-nested: the first `count` pairs form the base
    sample, the full 2*count the doubled one, so rel_change measures pure
    refinement drift of the supremum.
    """

    key: str
    count: int
    log_max_ratio: float
    log_max_ratio_base: float
    rel_change: float
    stable: bool
    argmax: tuple | None = None
    detail: dict = field(default_factory=dict)

    @property
    def max_ratio(self) -> float:
        return math.exp(self.log_max_ratio)


def bound_ratio_sweep(
    target_log: Callable,
    bound_log: Callable,
    sampler: Callable[[np.random.Generator, int], list],
    count: int,
    rng: np.random.Generator,
    key: str = "sweep",
    stability_tol: float = 0.25,
) -> SweepResult:
    """sup of target/bound over a seeded sample, with doubling stability.

    target_log and bound_log map a sample pair (x, y) to log values; a -inf
    target contributes ratio 0, a -inf bound with live target makes the
    sweep unstable by fiat.
    """
    pairs = sampler(rng, 2 * count)
    ratios = np.empty(len(pairs))
    for i, (x, y) in enumerate(pairs):
        t = float(target_log(x, y))
        b = float(bound_log(x, y))
        if t == -math.inf:
            ratios[i] = -math.inf
        elif b == -math.inf:
            ratios[i] = math.inf
        else:
            ratios[i] = t - b
    base = float(np.max(ratios[:count]))
    full = float(np.max(ratios))
    best = int(np.argmax(ratios))
    rel = math.expm1(full - base) if math.isfinite(full) else math.inf
    stable = math.isfinite(full) and rel <= stability_tol
    return SweepResult(
        key=key,
        count=count,
        log_max_ratio=full,
        log_max_ratio_base=base,
        rel_change=rel,
        stable=stable,
        argmax=(np.asarray(pairs[best][0]).tolist(), np.asarray(pairs[best][1]).tolist()),
    )


def _sampler_far(n: int):
    def sample(rng: np.random.Generator, count: int):
        pairs = []
        while len(pairs) < count:
            x = rng.normal(size=n)
            x *= math.exp(rng.uniform(math.log(0.3), math.log(6.0))) / np.linalg.norm(x)
            d = rng.normal(size=n)
            d /= np.linalg.norm(d)
            y = d * rng.uniform(2.0, 4.0) * np.linalg.norm(x)
            pairs.append((x, y))
        return pairs

    return sample


def _sampler_near(n: int):
    def sample(rng: np.random.Generator, count: int):
        pairs = []
        while len(pairs) < count:
            x = rng.normal(size=n)
            x *= math.exp(rng.uniform(math.log(0.3), math.log(6.0))) / np.linalg.norm(x)
            d = rng.normal(size=n)
            d /= np.linalg.norm(d)
            y = d * rng.uniform(0.05, 2.0) * np.linalg.norm(x)
            pairs.append((x, y))
        return pairs

    return sample


def _sampler_peak(n: int, r0_lo: float, r0_hi: float, require_global: bool = True):
    """Pairs with the peak location r0 in a window, filtered to the global
    region.

    Three draw modes keep the extremal corners populated: uniform r0 over
    the window, r0 packed logarithmically against r0 = 1 from either side,
    and (when the window reaches below 1) the boundary corner 1 - r0 of
    order 1/|x|^2 where the blocks brush both the separation constraint and
    their growth bound.  The perpendicular offset mixes unit scale with the
    sqrt(1-r0) scale of the block Gaussians.
    """
    spans_small = r0_lo < 1.0

    def sample(rng: np.random.Generator, count: int):
        pairs = []
        while len(pairs) < count:
            x = rng.normal(size=n)
            x *= math.exp(rng.uniform(math.log(0.5), math.log(8.0))) / np.linalg.norm(x)
            x_norm = float(np.linalg.norm(x))
            mode = rng.integers(3) if spans_small else 0
            if mode == 1:
                gap = math.exp(rng.uniform(math.log(1e-7), math.log(0.5)))
                side = 1.0 if (r0_hi > 1.0 and rng.uniform() < 0.5) else -1.0
                r0 = 1.0 + side * gap
                if not (r0_lo <= r0 <= r0_hi):
                    continue
            elif mode == 2:
                u = math.exp(rng.uniform(math.log(1.0 / 32.0), math.log(32.0)))
                r0 = 1.0 - u / (x_norm * x_norm)
                if not (r0_lo <= r0 <= r0_hi):
                    continue
            else:
                r0 = rng.uniform(r0_lo, r0_hi)
            if rng.uniform() < 0.5 and r0 < 1.0:
                scale = math.sqrt(max(1.0 - r0, 1e-12))
            else:
                scale = 1.0
            if n > 1:
                raw = rng.normal(size=n)
                perp = raw - (raw @ x) / (x @ x) * x
                norm = np.linalg.norm(perp)
                if norm < 1e-12:
                    continue
                perp *= abs(rng.normal()) * scale / norm
            else:
                perp = np.zeros(1)
            y = r0 * x + perp
            sep = float(np.linalg.norm(x - y))
            if require_global and sep * (1.0 + x_norm + np.linalg.norm(y)) <= 1.0:
                continue
            pairs.append((x, y))
        return pairs

    return sample


def _sampler_local(n: int):
    def sample(rng: np.random.Generator, count: int):
        return sample_local_pairs(rng, n, count)

    return sample


def _sampler_global(n: int, radius: float = 6.0):
    def sample(rng: np.random.Generator, count: int):
        return sample_global_pairs(rng, n, count, radius=radius)

    return sample


@dataclass(frozen=True)
class SweepSpec:
    key: str
    description: str
    runner: Callable[[int, int], SweepResult]


def _combine_sub_results(key: str, subs: dict[str, SweepResult]) -> SweepResult:
    best_label = max(subs, key=lambda k: subs[k].log_max_ratio)
    best = subs[best_label]
    return SweepResult(
        key=key,
        count=best.count,
        log_max_ratio=max(r.log_max_ratio for r in subs.values()),
        log_max_ratio_base=best.log_max_ratio_base,
        rel_change=max(r.rel_change for r in subs.values()),
        stable=all(r.stable for r in subs.values()),
        argmax=best.argmax,
        detail={k: r.log_max_ratio for k, r in subs.items()},
    )


def _a_loop_runner(
    key, make_target, make_bound, make_sampler, a_values=(0, 1, 2), count_factor=1
):
    def run(count: int, seed: int) -> SweepResult:
        subs = {}
        for i, a in enumerate(a_values):
            rng = np.random.default_rng([seed, i])
            subs[f"a={a}"] = bound_ratio_sweep(
                make_target(a),
                make_bound(a),
                make_sampler(a),
                count * count_factor,
                rng,
                key=key,
            )
        return _combine_sub_results(key, subs)

    return run


def _build_registry() -> dict[str, SweepSpec]:
    n = 2
    entries: dict[str, SweepSpec] = {}

    def add(key, description, runner):
        entries[key] = SweepSpec(key=key, description=description, runner=runner)

    def k1(a):
        return lambda x, y: _first_half_integral_log(n, a, x, np.atleast_2d(y))[0]

    def k2(a, piece):
        return lambda x, y: _second_half_integral_log(n, a, x, np.atleast_2d(y), piece)[0]

    def peak_stats(x, y):
        r0, yp, st, _ = _polar_batch(x, np.atleast_2d(y))
        return float(r0[0]), float(yp[0]), float(st[0])

    add(
        "step1-far",
        "first-half integral against |x|^{1-n} when |y| >= 2|x|",
        _a_loop_runner(
            "step1-far",
            lambda a: k1(a),
            lambda a: lambda x, y: (1 - n) * math.log(np.linalg.norm(x)),
            lambda a: _sampler_far(n),
        ),
    )

    def near_bound(a):
        def bound(x, y):
            xn = float(np.linalg.norm(x))
            yn = float(np.linalg.norm(y))
            _, yp, _, _ = _polar_batch(x, np.atleast_2d(y))
            first = -yp[0] + (a - 1) * math.log(xn) + (n - 1) * (math.log(yn) - math.log(xn))
            second = (a - n) * math.log(xn)
            return float(np.logaddexp(first, second))

        return bound

    add(
        "step1-near",
        "first-half integral against its two-term comparison when |y| < 2|x|",
        _a_loop_runner(
            "step1-near",
            lambda a: k1(a),
            near_bound,
            lambda a: _sampler_near(n),
            count_factor=4,
        ),
    )
    add(
        "case-2.1",
        "second-half integral against |x|^{-n} when the peak sits at r0 <= 1/3",
        _a_loop_runner(
            "case-2.1",
            lambda a: k2(a, "full"),
            lambda a: lambda x, y: -n * math.log(np.linalg.norm(x)),
            lambda a: _sampler_peak(n, 0.02, 1.0 / 3.0),
        ),
    )
    add(
        "case-2.2",
        "second-half integral against |x|^{-n} when the peak sits at r0 >= 2",
        _a_loop_runner(
            "case-2.2",
            lambda a: k2(a, "full"),
            lambda a: lambda x, y: -n * math.log(np.linalg.norm(x)),
            lambda a: _sampler_peak(n, 2.0, 4.0),
            count_factor=16,
        ),
    )

    def ab_bound(a):
        def bound(x, y):
            xn = float(np.linalg.norm(x))
            r0, yp, _ = peak_stats(x, y)
            return float(
                np.logaddexp(
                    _log_block_a(n, a, xn, np.array([r0]), np.array([yp]))[0],
                    _log_block_b(n, a, xn, np.array([r0]), np.array([yp]))[0],
                )
            )

        return bound

    add(
        "case-2.3.1",
        "peak-window part of the second-half integral against block A + block B",
        _a_loop_runner(
            "case-2.3.1",
            lambda a: k2(a, "near"),
            ab_bound,
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 1.0 - 1e-9),
        ),
    )

    def angular_bound(x, y):
        _, _, st = peak_stats(x, y)
        return float(_log_min_growth_angular(n, float(np.linalg.norm(x)), np.array([st]))[0])

    add(
        "case-2.3.2",
        "pre-peak part of the second-half integral against growth/angular min",
        _a_loop_runner(
            "case-2.3.2",
            lambda a: k2(a, "mid"),
            lambda a: angular_bound,
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 2.0),
            count_factor=4,
        ),
    )
    add(
        "case-2.3.3",
        "endpoint part of the second-half integral against growth/angular min",
        _a_loop_runner(
            "case-2.3.3",
            lambda a: k2(a, "edge"),
            lambda a: angular_bound,
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 2.0),
            count_factor=4,
        ),
    )

    def block_a_target(a):
        def target(x, y):
            r0, yp, _ = peak_stats(x, y)
            return float(_log_block_a(n, a, float(np.linalg.norm(x)), np.array([r0]), np.array([yp]))[0])

        return target

    def block_b_target(a):
        def target(x, y):
            r0, yp, _ = peak_stats(x, y)
            return float(_log_block_b(n, a, float(np.linalg.norm(x)), np.array([r0]), np.array([yp]))[0])

        return target

    add(
        "A-growth",
        "block A against (1+|x|)^n",
        _a_loop_runner(
            "A-growth",
            block_a_target,
            lambda a: lambda x, y: n * math.log1p(np.linalg.norm(x)),
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 1.0 - 1e-9),
        ),
    )

    def angular_only(x, y):
        _, _, st = peak_stats(x, y)
        xn = float(np.linalg.norm(x))
        with np.errstate(divide="ignore"):
            return float(-n * (math.log(xn) + np.log(st)))

    add(
        "A10",
        "block A at a = 0 against the angular comparison",
        _a_loop_runner(
            "A10",
            block_a_target,
            lambda a: angular_only,
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 1.0 - 1e-9),
            a_values=(0,),
        ),
    )
    add(
        "A11",
        "block A at a = 1 against the angular comparison",
        _a_loop_runner(
            "A11",
            block_a_target,
            lambda a: angular_only,
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 1.0 - 1e-9),
            a_values=(1,),
        ),
    )

    def block_a2_small(x, y):
        r0, yp, _ = peak_stats(x, y)
        xn = float(np.linalg.norm(x))
        if xn * xn * (1.0 - r0) > 1.0:
            return -math.inf
        return float(_log_block_a(n, 2, xn, np.array([r0]), np.array([yp]))[0])

    add(
        "A2-small",
        "block A at a = 2 on the short-range sector against the angular comparison",
        _a_loop_runner(
            "A2-small",
            lambda a: block_a2_small,
            lambda a: angular_only,
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 1.0 - 1e-9),
            a_values=(2,),
        ),
    )

    def block_a2_large(x, y):
        r0, yp, _ = peak_stats(x, y)
        xn = float(np.linalg.norm(x))
        if xn * xn * (1.0 - r0) < 1.0 or not (1.0 / 3.0 <= r0 < 1.0):
            return -math.inf
        return float(_log_block_a(n, 2, xn, np.array([r0]), np.array([yp]))[0])

    def collapsed_peak_bound(x, y):
        spec = LemmaKernelSpec("L44", n=n, delta=_BLOCK_C)
        lm = float(lemma_kernel_batch(spec, x, np.atleast_2d(y))[0])
        if lm == -math.inf:
            return -math.inf
        xn = float(np.linalg.norm(x))
        yn = float(np.linalg.norm(np.atleast_1d(y)))
        return lm + xn * xn - yn * yn

    add(
        "A2-large",
        "block A at a = 2 on the long-range sector against the collapsed-peak kernel",
        _a_loop_runner(
            "A2-large",
            lambda a: block_a2_large,
            lambda a: collapsed_peak_bound,
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 1.0 - 1e-9),
            a_values=(2,),
        ),
    )
    add(
        "B-growth",
        "block B against (1+|x|)^n",
        _a_loop_runner(
            "B-growth",
            block_b_target,
            lambda a: lambda x, y: n * math.log1p(np.linalg.norm(x)),
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 1.0 - 1e-9),
            count_factor=16,
        ),
    )
    add(
        "B-angular",
        "block B against the angular comparison",
        _a_loop_runner(
            "B-angular",
            block_b_target,
            lambda a: angular_only,
            lambda a: _sampler_peak(n, 1.0 / 3.0 + 1e-9, 1.0 - 1e-9),
        ),
    )

    def stim_target(x, y):
        r0, _, _ = peak_stats(x, y)
        return window_gaussian_integral_log(float(np.linalg.norm(x)), r0)

    def stim_bound(x, y):
        r0, _, _ = peak_stats(x, y)
        s = 1.0 - r0
        xn = float(np.linalg.norm(x))
        return min(0.5 * math.log(s) - math.log(xn), math.log(s))

    def stim_runner(count: int, seed: int) -> SweepResult:
        rng = np.random.default_rng([seed, 0])
        return bound_ratio_sweep(
            stim_target,
            stim_bound,
            _sampler_peak(n, 1.0 / 3.0 + 1e-9, 1.0 - 1e-9),
            count,
            rng,
            key="stimaint",
        )

    add(
        "stimaint",
        "peak-window Gaussian integral against min(sqrt(1-r0)/|x|, 1-r0)",
        stim_runner,
    )

    def decomposition_runner(count: int, seed: int) -> SweepResult:
        alpha = MultiIndex.of(2, 1)

        def target(x, y):
            _, lm = riesz_kernel_batch(alpha, np.atleast_2d(x), np.atleast_2d(y))
            return float(lm[0])

        def bound(x, y):
            xn = float(np.linalg.norm(x))
            yn = float(np.linalg.norm(np.atleast_1d(y)))
            parts = []
            for a in range(alpha.order + 1):
                parts.append(_first_half_integral_log(n, a, x, np.atleast_2d(y))[0])
                parts.append(_second_half_integral_log(n, a, x, np.atleast_2d(y), "full")[0])
            return -xn * xn + yn * yn + float(
                signed_logsumexp(np.asarray(parts)[None, :], axis=1)[1][0]
            )

        rng = np.random.default_rng([seed, 0])
        return bound_ratio_sweep(
            target, bound, _sampler_global(n), count, rng, key="decomposition"
        )

    add(
        "decomposition",
        "full kernel against the shared-factor sum of first/second-half integrals",
        decomposition_runner,
    )

    def local_integral_runner(count: int, seed: int) -> SweepResult:
        subs = {}
        for i, dim in enumerate((1, 2)):
            mu, nu = 3.0, 0.0

            def target(x, y, d=dim):
                return near_diagonal_profile_integral(d, mu, nu, x, y)

            def bound(x, y, d=dim):
                return -(d + mu - nu - 2.0) * math.log(np.linalg.norm(x - y))

            rng = np.random.default_rng([seed, i])
            subs[f"n={dim}"] = bound_ratio_sweep(
                target, bound, _sampler_local(dim), count, rng, key="local-integral"
            )
        return _combine_sub_results("local-integral", subs)

    add(
        "local-integral",
        "near-diagonal profile integral against |x-y|^{-(n+mu-nu-2)} at mu=3, nu=0",
        local_integral_runner,
    )

    def cz_kernel_runner(count: int, seed: int) -> SweepResult:
        alpha = MultiIndex.of(1, 1)

        def target(x, y):
            _, lm = riesz_kernel_batch(alpha, np.atleast_2d(x), np.atleast_2d(y))
            return float(lm[0])

        def bound(x, y):
            return -n * math.log(np.linalg.norm(x - y))

        rng = np.random.default_rng([seed, 0])
        return bound_ratio_sweep(
            target, bound, _sampler_local(n), count, rng, key="cz-kernel"
        )

    add("cz-kernel", "kernel size against |x-y|^{-n} on the local region", cz_kernel_runner)

    def cz_gradient_runner(count: int, seed: int) -> SweepResult:
        alpha = MultiIndex.of(1, 1)

        def target(x, y):
            gx, gy = _fd_gradient_logs(alpha, np.atleast_2d(x), np.atleast_2d(y))
            return float(np.logaddexp(gx[0], gy[0]))

        def bound(x, y):
            return -(n + 1) * math.log(np.linalg.norm(x - y))

        rng = np.random.default_rng([seed, 0])
        return bound_ratio_sweep(
            target, bound, _sampler_local(n), count, rng, key="cz-gradient"
        )

    add(
        "cz-gradient",
        "kernel gradient size against |x-y|^{-(n+1)} on the local region",
        cz_gradient_runner,
    )
    return entries


def resolve_registry_key(key: str) -> str:
    """Normalize user-facing selectors (e.g. '5.2.3.2' -> 'case-2.3.2')."""
    k = key.strip()
    if k in BOUND_REGISTRY:
        return k
    trimmed = k[2:] if k.startswith("5.") else k
    candidate = f"case-{trimmed}"
    if candidate in BOUND_REGISTRY:
        return candidate
    raise KeyError(f"no registered bound named {key!r}")


def run_bound_sweep(key: str, count: int = 384, seed: int = 7) -> SweepResult:
    spec = BOUND_REGISTRY[resolve_registry_key(key)]
    return spec.runner(count, seed)


def run_all_bound_sweeps(
    keys: Sequence[str] | None = None, count: int = 384, seed: int = 7
) -> dict[str, SweepResult]:
    names = sorted(BOUND_REGISTRY) if keys is None else [resolve_registry_key(k) for k in keys]
    return {name: BOUND_REGISTRY[name].runner(count, seed) for name in names}


# --------------------------------------------------------------------------
# local kernel/gradient suprema


def _fd_gradient_logs(
    alpha: MultiIndex, X: np.ndarray, Y: np.ndarray, fd_scale: float = 1e-4
) -> tuple[np.ndarray, np.ndarray]:
    """log |grad_x K| and log |grad_y K| for pair rows, one batched call.

    Central differences with step proportional to the separation; each
    pair's 4n kernel values are rescaled by their own maximum before
    differencing, so the arithmetic stays in range regardless of the
    e^{|y|^2-|x|^2} size of the kernel.
    """
    m, n = X.shape
    sep = np.linalg.norm(X - Y, axis=1)
    h = fd_scale * sep
    shifts = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        step = h[:, None] * e[None, :]
        shifts.extend([(X + step, Y), (X - step, Y), (X, Y + step), (X, Y - step)])
    Xs = np.concatenate([s[0] for s in shifts])
    Ys = np.concatenate([s[1] for s in shifts])
    signs, logmags = riesz_kernel_batch(alpha, Xs, Ys)
    # layout: block (j, direction) of size m each, 4 blocks per axis j
    signs = signs.reshape(4 * n, m)
    logmags = logmags.reshape(4 * n, m)
    shift = np.max(logmags, axis=0)
    vals = signs * np.exp(logmags - shift[None, :])
    gx_sq = np.zeros(m)
    gy_sq = np.zeros(m)
    for j in range(n):
        base = 4 * j
        dx = (vals[base] - vals[base + 1]) / (2.0 * h)
        dy = (vals[base + 2] - vals[base + 3]) / (2.0 * h)
        gx_sq += dx * dx
        gy_sq += dy * dy
    with np.errstate(divide="ignore"):
        return 0.5 * np.log(gx_sq) + shift, 0.5 * np.log(gy_sq) + shift


@dataclass
class CZLocalResult:
    """Suprema of |K| |x-y|^n and (|grad_x K| + |grad_y K|) |x-y|^{n+1} over
    seeded local pairs, with doubling drift for both statistics."""

    alpha: tuple
    n: int
    count: int
    log_sup_kernel: float
    log_sup_kernel_base: float
    kernel_rel_change: float
    log_sup_gradient: float
    log_sup_gradient_base: float
    gradient_rel_change: float


def czlocal_supremum(
    alpha: MultiIndex, n: int, count: int, rng: np.random.Generator
) -> CZLocalResult:
    pairs = sample_local_pairs(rng, n, 2 * count)
    X = np.array([p[0] for p in pairs])
    Y = np.array([p[1] for p in pairs])
    sep = np.linalg.norm(X - Y, axis=1)
    _, log_k = riesz_kernel_batch(alpha, X, Y)
    stat_k = log_k + n * np.log(sep)
    gx, gy = _fd_gradient_logs(alpha, X, Y)
    stat_g = np.logaddexp(gx, gy) + (n + 1) * np.log(sep)
    k_base, k_full = float(np.max(stat_k[:count])), float(np.max(stat_k))
    g_base, g_full = float(np.max(stat_g[:count])), float(np.max(stat_g))
    return CZLocalResult(
        alpha=tuple(alpha),
        n=n,
        count=count,
        log_sup_kernel=k_full,
        log_sup_kernel_base=k_base,
        kernel_rel_change=math.expm1(k_full - k_base),
        log_sup_gradient=g_full,
        log_sup_gradient_base=g_base,
        gradient_rel_change=math.expm1(g_full - g_base),
    )


# --------------------------------------------------------------------------
# rank-one operator probes


def _rank_one_radial_log(spec: LemmaKernelSpec, t: np.ndarray) -> np.ndarray:
    """log of the x-radial factor e^{-t^2} t^{-mu} (1+t)^{-nu}."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return -t * t - spec.mu * np.log(t) - spec.nu * np.log1p(t)


def rank_one_quasinorm_exact(spec: LemmaKernelSpec) -> float:
    """log of sup_t Tf(t) * measure(B(0,t)) for the rank-one operator with a
    unit-norm input, computed from the closed forms.

    Mirrors the analytic construction: for each level s the super-level set
    is the centered ball whose radius is the largest solution of Tf(t) = s,
    so the supremum over s equals the supremum over t of the product.
    """
    if spec.kernel_id != "L42":
        raise ValueError("exact quasi-norm applies to the rank-one kernel only")
    n = spec.n
    t = np.exp(np.linspace(math.log(1e-10), math.log(40.0), 20000))
    logq = (
        _rank_one_radial_log(spec, t)
        - 0.5 * n * _LOG_PI
        + _log_radial_ball_measure(n, t)
    )
    k = int(np.argmax(logq))
    lo = t[max(k - 1, 0)]
    hi = t[min(k + 1, t.size - 1)]

    def neg(log_t: float) -> float:
        tt = np.array([math.exp(log_t)])
        return -float(
            _rank_one_radial_log(spec, tt)[0]
            - 0.5 * n * _LOG_PI
            + _log_radial_ball_measure(n, tt)[0]
        )

    from scipy.optimize import minimize_scalar

    res = minimize_scalar(neg, bounds=(math.log(lo), math.log(hi)), method="bounded")
    return float(-res.fun)


@dataclass
class QuasinormProbe:
    centers: tuple
    log_quasi_norms: np.ndarray
    log_max: float
    metadata: dict = field(default_factory=dict)


def _ball_lebesgue_nodes(
    n: int, center: np.ndarray, radius: float, radial: int = 24, angular: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """Polar Lebesgue quadrature nodes/log-weights over a ball."""
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(radial)
    r = 0.5 * radius * (gl_nodes + 1.0)
    w_r = 0.5 * radius * gl_weights
    if n == 1:
        dirs = np.array([[1.0], [-1.0]])
        w_a = np.array([1.0, 1.0])
    elif n == 2:
        theta = 2.0 * math.pi * (np.arange(angular) + 0.5) / angular
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        w_a = np.full(angular, 2.0 * math.pi / angular)
    else:
        raise NotImplementedError("ball nodes implemented for n <= 2")
    pts = center[None, None, :] + r[:, None, None] * dirs[None, :, :]
    logw = (
        np.log(w_r[:, None]) + np.log(w_a[None, :]) + (n - 1) * np.log(r[:, None])
    )
    return pts.reshape(-1, n), logw.reshape(-1)


def weak_quasinorm_probe(
    spec: LemmaKernelSpec,
    centers: Sequence,
    rho: float = 0.25,
    t_min: float = 1e-8,
    t_max: float = 30.0,
    t_count: int = 4096,
) -> QuasinormProbe:
    """Per-center weak quasi-norms of the comparison operator applied to
    normalized ball indicators.

    Tf is sampled along the ray t e_1 (the catalog kernels depend on x only
    through |x| and quantities fixed by the input ball, so the radial slice
    determines the level sets); measures use the closed-form centered-ball
    values on geometric annuli.  Works for n <= 2.
    """
    n = spec.n
    if n > 2:
        raise NotImplementedError("probe implemented for n <= 2")
    t = np.exp(np.linspace(math.log(t_min), math.log(t_max), t_count))
    inner_edges = np.sqrt(t[:-1] * t[1:])
    edges = np.concatenate([[1e-300], inner_edges, [t_max]])
    log_m = _log_radial_ball_measure(n, edges)
    # log of measure of the annulus owned by each t-node
    with np.errstate(invalid="ignore"):
        log_dm = log_m[1:] + np.log(-np.expm1(np.minimum(log_m[:-1] - log_m[1:], 0.0)))
    log_dm[0] = log_m[1]
    results = []
    meta = {
        "rho": rho,
        "t_count": t_count,
        "t_range": (t_min, t_max),
        "estimator": "radial-grid",
    }
    for center in centers:
        c = np.asarray(center, dtype=float)
        if c.ndim == 0:
            c = np.concatenate([[float(c)], np.zeros(n - 1)])
        ball_pts, ball_logw = _ball_lebesgue_nodes(n, c, rho)
        log_norm = gamma_inv_ball_log(n, c, rho).logmag
        if spec.kernel_id == "L42":
            ball_sum = float(
                signed_logsumexp(
                    (np.sum(ball_pts * ball_pts, axis=1) + ball_logw)[None, :], axis=1
                )[1][0]
            )
            log_tf = _rank_one_radial_log(spec, t) + ball_sum - log_norm
        else:
            log_tf = np.empty(t_count)
            for i, ti in enumerate(t):
                x = np.concatenate([[ti], np.zeros(n - 1)])
                vals = lemma_kernel_batch(spec, x, ball_pts) + ball_logw - log_norm
                log_tf[i] = float(signed_logsumexp(vals[None, :], axis=1)[1][0])
        if np.all(np.diff(log_tf) <= 1e-9):
            # non-increasing profile: the super-level set at s = Tf(t_k) is
            # the centered ball of radius t_k, measured in closed form
            quasi = log_tf + _log_radial_ball_measure(n, t)
            results.append(float(np.max(quasi)))
        else:
            best = -math.inf
            for i in range(0, t_count, 512):
                s_block = log_tf[i : i + 512]
                mask = log_tf[None, :] > s_block[:, None]
                masses = np.where(mask, log_dm[None, :], -np.inf)
                _, lm = signed_logsumexp(masses, axis=1)
                best = max(best, float(np.max(s_block + lm)))
            results.append(best)
    logs = np.asarray(results)
    return QuasinormProbe(
        centers=tuple(np.asarray(c).tolist() for c in centers),
        log_quasi_norms=logs,
        log_max=float(np.max(logs)),
        metadata=meta,
    )


def rank_one_growth_probe(
    spec: LemmaKernelSpec, t_mins: Sequence[float], center=1.5, rho: float = 0.25
) -> np.ndarray:
    """Quasi-norm estimates at a sequence of inner evaluation cutoffs.

    Inside the hypotheses the values saturate as the cutoff shrinks; with
    mu > n they grow like t_min^{n-mu}, the numerical signature of
    unboundedness.
    """
    out = []
    for tm in t_mins:
        probe = weak_quasinorm_probe(spec, [center], rho=rho, t_min=tm)
        out.append(probe.log_max)
    return np.asarray(out)


# --------------------------------------------------------------------------
# tube counterexample


def tube_axis_basis(n: int) -> np.ndarray:
    """Orthonormal basis whose first column is the diagonal direction."""
    cols = [np.ones(n)]
    for j in range(n - 1):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(e)
    q, r = np.linalg.qr(np.column_stack(cols))
    return q * np.sign(np.diag(r))[None, :]


def tube_membership(
    n: int, eta: float, perp_half: float = 1.0, positive_only: bool = False
) -> Callable[[np.ndarray], np.ndarray]:
    """Membership predicate for the tube around the diagonal point.

    The tube consists of x with |x_perp| < perp_half and axis coordinate
    between (4/3)|z| and (3/2)|z| in magnitude (one-sided when
    positive_only, matching the evaluation grid of the counterexample).
    """
    q = tube_axis_basis(n)
    z_norm = math.sqrt(n) * eta

    def member(pts: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(pts) @ q
        axis = coords[:, 0] if positive_only else np.abs(coords[:, 0])
        ok = (axis > 4.0 * z_norm / 3.0) & (axis < 1.5 * z_norm)
        if n > 1:
            ok &= np.all(np.abs(coords[:, 1:]) < perp_half, axis=1)
        return ok

    return member


@dataclass(frozen=True)
class CounterexampleConfig:
    """Growth-law experiment: normalized ball indicator at the diagonal
    point, transform evaluated over the displaced tube, weak quasi-norm
    lower bound per eta.

    The tube and the ball must be separated: |z|/3 - ball_radius >= 0.5.
    grid_axis is the axis cell count at the smallest eta; larger etas get
    proportionally more cells so the cell length stays constant across the
    sweep (the tube length grows linearly with eta).
    """

    alpha: MultiIndex
    etas: tuple
    n: int = 2
    ball_radius: float = 1.0
    tube_perp_half: float = 1.0
    grid_axis: int = 64
    grid_perp: int = 16
    ball_radial: int = 20
    ball_angular: int = 48

    def __post_init__(self):
        object.__setattr__(self, "etas", tuple(float(e) for e in self.etas))
        if self.alpha.order < 1:
            raise ValueError("the transform needs |alpha| >= 1")
        if self.alpha.dim != self.n:
            raise ValueError("alpha dimension must match n")
        if self.ball_radius <= 0.0 or self.tube_perp_half <= 0.0:
            raise ValueError("radii must be positive")
        if not self.etas or any(e <= 0.0 for e in self.etas):
            raise ValueError("etas must be positive")
        for e in self.etas:
            gap = math.sqrt(self.n) * e / 3.0 - self.ball_radius
            if gap < 0.5:
                raise ValueError(
                    f"eta={e} leaves gap {gap:.3f} between tube and ball; "
                    "need at least 0.5"
                )


def _centroid_cells(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weight centroid of exp(u^2) per cell plus adjusted log cell size.

    The centroid is exact, int u exp(u^2) du = (exp(b^2) - exp(a^2)) / 2,
    evaluated in the log domain so far-out axis cells cannot overflow; the
    returned log sizes are the exact cell integrals divided by the density
    at the centroid, keeping size * exp(centroid^2) the exact cell weight.
    A cell symmetric around zero gets centroid zero.
    """
    a, b = edges[:-1], edges[1:]
    log_i = _log_gauss_sq_cells(edges)
    hi = np.maximum(a * a, b * b)
    gap = np.abs(b * b - a * a)
    sign = np.sign(b * b - a * a)
    with np.errstate(divide="ignore"):
        log_num = hi + np.log(-np.expm1(-gap)) - math.log(2.0)
    u = np.where(gap == 0.0, 0.0, sign * np.exp(log_num - log_i))
    return u, log_i - u * u


def _tube_grid(cfg: CounterexampleConfig, eta: float):
    """Weight-centroid grid over the tube plus exact cell volumes (log).

    The measure density exp(|x|^2) factorizes across the rotated axes, so
    each cell's true measure is a product of one-dimensional exp(u^2)
    integrals.  Cells carry their weight centroid as the evaluation point
    and volumes are the exact integrals divided by the density there, so
    the mass rule vol * pi^{n/2} * exp(|point|^2) is exact per cell and the
    transform is sampled where the cell's measure actually concentrates
    (a midpoint rule misplaces most of a far-out cell's mass, inflating
    level-set masses at large eta).

    The axis count scales with eta relative to the smallest eta in the
    config, keeping the cell length constant across a sweep; the perp
    extent is eta-independent, so the perp count stays fixed.
    """
    n = cfg.n
    q = tube_axis_basis(n)
    z_norm = math.sqrt(n) * eta
    lo, hi = 4.0 * z_norm / 3.0, 1.5 * z_norm
    axis_count = int(math.ceil(cfg.grid_axis * eta / min(cfg.etas)))
    axis_edges = np.linspace(lo, hi, axis_count + 1)
    axis, log_axis = _centroid_cells(axis_edges)
    if n == 1:
        return axis[:, None] @ q.T, log_axis
    w = cfg.tube_perp_half
    perp_edges = np.linspace(-w, w, cfg.grid_perp + 1)
    perp, log_perp = _centroid_cells(perp_edges)
    grids = np.meshgrid(axis, *([perp] * (n - 1)), indexing="ij")
    coords = np.stack([g.reshape(-1) for g in grids], axis=-1)
    logs = np.meshgrid(log_axis, *([log_perp] * (n - 1)), indexing="ij")
    log_cell = np.sum([g.reshape(-1) for g in logs], axis=0)
    return coords @ q.T, log_cell


def _tube_tf_logs(cfg: CounterexampleConfig, eta: float):
    """Sign and log of Tf over the tube grid, plus effective cell volumes.

    f is the ball indicator at the diagonal point normalized to unit
    measure-norm, and Tf(x) = sum_j w_j K(x, y_j) f with the tube disjoint
    from the ball, so no excision is involved; this is the same integral
    apply_glob computes there, vectorized over the shared ball nodes.
    """
    n = cfg.n
    z = np.full(n, eta)
    pts, log_cell = _tube_grid(cfg, eta)
    ball_pts, ball_logw = _ball_lebesgue_nodes(
        n, z, cfg.ball_radius, radial=cfg.ball_radial, angular=cfg.ball_angular
    )
    log_f = -gamma_inv_ball_log(n, z, cfg.ball_radius).logmag
    m, mb = pts.shape[0], ball_pts.shape[0]
    signs = np.empty(m, dtype=int)
    logmags = np.empty(m)
    chunk = max(1, 2_000_000 // mb)
    for start in range(0, m, chunk):
        xs = pts[start : start + chunk]
        mx = xs.shape[0]
        X = np.repeat(xs, mb, axis=0)
        Y = np.tile(ball_pts, (mx, 1))
        s, lm = riesz_kernel_batch(cfg.alpha, X, Y)
        terms = (lm + np.tile(ball_logw, mx) + log_f).reshape(mx, mb)
        sg, lg = signed_logsumexp(terms, s.reshape(mx, mb), axis=1)
        signs[start : start + mx] = sg
        logmags[start : start + mx] = lg
    return pts, signs, logmags, log_cell


def _eta_report(cfg: CounterexampleConfig, eta: float) -> LevelSetReport:
    pts, signs, logmags, log_cell = _tube_tf_logs(cfg, eta)
    scale = float(np.max(logmags))
    values = signs * np.exp(logmags - scale)
    tf = GridFunction(
        n=cfg.n,
        points=pts,
        values=values,
        cell_volumes=np.exp(log_cell),
        log_abs_values=logmags,
    )
    return level_set_report(
        tf,
        f_norm=1.0,
        metadata={
            "eta": eta,
            "grid_axis": cfg.grid_axis,
            "grid_perp": cfg.grid_perp,
            "truncation": "tube",
        },
    )


def _eta_job(args) -> tuple[float, LevelSetReport]:
    cfg, eta = args
    return eta, _eta_report(cfg, eta)


@dataclass
class CounterexampleResult:
    config: CounterexampleConfig
    etas: tuple
    log_quasi_norms: np.ndarray
    reports: dict
    slope: float
    residual: float
    expectation: dict
    passed: bool

    @property
    def quasi_norms(self) -> np.ndarray:
        return np.exp(self.log_quasi_norms)


def counterexample_expectation(order: int) -> dict:
    """Pass/fail thresholds for the fitted growth exponent by |alpha|."""
    if order <= 2:
        return {"slope_max": 0.3, "factor_max": 3.0}
    if order == 3:
        return {"slope_min": 0.6}
    if order == 4:
        return {"slope_min": 1.5}
    return {"slope_min": 0.5 * (order - 2)}


def counterexample_lower_bound(
    cfg: CounterexampleConfig, jobs: int | None = None
) -> CounterexampleResult:
    """Tube-restricted weak quasi-norm lower bounds per eta, with growth fit.

    Per-eta work is independent; jobs > 1 runs the etas in a process pool.
    Results merge in eta order, so worker count never changes the output.
    """
    tasks = [(cfg, eta) for eta in cfg.etas]
    if jobs is not None and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            produced = dict(pool.map(_eta_job, tasks))
    else:
        produced = dict(map(_eta_job, tasks))
    etas = tuple(sorted(produced))
    logs = np.array([produced[e].log_quasi_norm for e in etas])
    expectation = counterexample_expectation(cfg.alpha.order)
    if len(etas) >= 3:
        fit = slope_fit(np.array(etas), np.exp(logs))
        slope, residual = fit.slope, fit.residual
        passed = True
        if "slope_min" in expectation:
            passed &= slope >= expectation["slope_min"]
        if "slope_max" in expectation:
            passed &= slope <= expectation["slope_max"]
        if "factor_max" in expectation:
            # growth above the starting level; a decaying family scores 1
            growth = math.exp(float(np.max(logs) - logs[0]))
            passed &= growth < expectation["factor_max"]
            expectation = {**expectation, "factor": growth}
    else:
        slope = residual = math.nan
        passed = False
        expectation = {**expectation, "note": "growth fit needs >= 3 etas"}
    return CounterexampleResult(
        config=cfg,
        etas=etas,
        log_quasi_norms=logs,
        reports={e: produced[e] for e in etas},
        slope=slope,
        residual=residual,
        expectation=expectation,
        passed=bool(passed),
    )


def tube_kernel_lower_constant(
    alpha: MultiIndex, n: int, eta: float, count: int = 256, rng=None
) -> tuple[float, int]:
    """min over sampled tube/ball pairs of
    (-1)^{|alpha|} K(x,y) / (|z|^{|alpha|-1} e^{-|x|^2+|y|^2}),
    as a log, plus the number of samples where the sign came out wrong.
    """
    rng = rng or np.random.default_rng(11)
    z = np.full(n, eta)
    z_norm = math.sqrt(n) * eta
    q = tube_axis_basis(n)
    axis = rng.uniform(4.0 * z_norm / 3.0, 1.5 * z_norm, size=count)
    perp = rng.uniform(-1.0, 1.0, size=(count, n - 1))
    X = np.concatenate([axis[:, None], perp], axis=1) @ q.T
    d = rng.normal(size=(count, n))
    d /= np.linalg.norm(d, axis=1)[:, None]
    Y = z[None, :] + d * (rng.uniform(size=count) ** (1.0 / n))[:, None]
    signs, logmags = riesz_kernel_batch(alpha, X, Y)
    want = 1 if alpha.order % 2 == 0 else -1
    violations = int(np.sum(signs != want))
    ref = (
        (alpha.order - 1) * math.log(z_norm)
        - np.sum(X * X, axis=1)
        + np.sum(Y * Y, axis=1)
    )
    ratios = np.where(signs == want, logmags - ref, -np.inf)
    return float(np.min(ratios)), violations


# --------------------------------------------------------------------------
# growth fitting and reports


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float


def slope_fit(etas, values) -> SlopeFit:
    """Least-squares slope of log(value) against log(eta)."""
    etas = np.asarray(etas, dtype=float)
    values = np.asarray(values, dtype=float)
    if etas.size < 3:
        raise ValueError("need at least three points to fit a growth rate")
    if np.any(etas <= 0.0) or np.any(values <= 0.0):
        raise ValueError("growth fitting needs positive etas and values")
    lx, ly = np.log(etas), np.log(values)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((slope * lx + intercept - ly) ** 2)))
    return SlopeFit(slope=float(slope), intercept=float(intercept), residual=resid)


def _experiment_id(cfg: CounterexampleConfig) -> str:
    return "counterexample-alpha" + "-".join(map(str, cfg.alpha)) + f"-n{cfg.n}"


def _exp_safe(log_value: float) -> float:
    if log_value == -math.inf:
        return 0.0
    return math.exp(log_value) if log_value < 700.0 else math.inf


def write_counterexample_report(
    result: CounterexampleResult, csv_path: str, json_path: str, extra_config: dict | None = None
) -> None:
    """CSV of per-eta level-set rows plus a JSON summary with the fit."""
    exp_id = _experiment_id(result.config)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", "eta", "s", "measure", "quasi_norm"])
        for eta in result.etas:
            rep = result.reports[eta]
            for ls, lm in zip(rep.log_thresholds, rep.log_measures):
                writer.writerow(
                    [
                        exp_id,
                        f"{eta:.6g}",
                        f"{_exp_safe(ls):.12e}",
                        f"{_exp_safe(lm):.12e}",
                        f"{rep.quasi_norm:.12e}",
                    ]
                )
    summary = {
        "experiment": exp_id,
        "alpha": list(result.config.alpha),
        "n": result.config.n,
        "etas": list(result.etas),
        "quasi_norms": [float(v) for v in result.quasi_norms],
        "slope": result.slope,
        "residual": result.residual,
        "expectation": result.expectation,
        "passed": result.passed,
        "config": {
            "ball_radius": result.config.ball_radius,
            "tube_perp_half": result.config.tube_perp_half,
            "grid_axis": result.config.grid_axis,
            "grid_perp": result.config.grid_perp,
            "ball_radial": result.config.ball_radial,
            "ball_angular": result.config.ball_angular,
            **(extra_config or {}),
        },
    }
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


BOUND_REGISTRY: dict[str, SweepSpec] = _build_registry()
