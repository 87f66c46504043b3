"""Local/global splitting of pairs (x, y).

A pair is local at scale delta when |x - y| (1 + |x| + |y|) <= delta.  The
smooth cutoff chi is 1 on the delta = 1 region, 0 outside the delta = 2
region, and rides a quintic smoothstep in between, which keeps
|grad chi| = O(1/|x - y|) on the transition shell.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from rieszlab.logscaled import LogScaled

__all__ = [
    "membership_u",
    "in_N",
    "chi",
    "chi_batch",
    "grad_chi",
    "split_kernel",
    "sample_local_pairs",
    "sample_global_pairs",
]


def membership_u(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.linalg.norm(x - y) * (1.0 + np.linalg.norm(x) + np.linalg.norm(y)))


def in_N(delta: float, x: np.ndarray, y: np.ndarray) -> bool:
    """Membership in the local region at scale delta (delta 1 or 2 in use)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return membership_u(x, y) <= delta


def _smoothstep(t: float) -> float:
    # quintic ramp: value and first two derivatives vanish at both ends
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def _smoothstep_prime(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    return 30.0 * t * t * (1.0 - t) * (1.0 - t)


def chi(x: np.ndarray, y: np.ndarray) -> float:
    """Smooth cutoff: 1 on the inner local region, 0 on the global one."""
    return 1.0 - _smoothstep(membership_u(x, y) - 1.0)


def chi_batch(x: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """chi(x, y) for one x against many y; Y has shape (m, n)."""
    x = np.asarray(x, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    u = np.linalg.norm(Y - x, axis=1) * (
        1.0 + np.linalg.norm(x) + np.linalg.norm(Y, axis=1)
    )
    t = np.clip(u - 1.0, 0.0, 1.0)
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def grad_chi(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of chi in x and in y.

    On the transition shell 1 < u < 2 the product |grad chi| |x - y| stays
    below a fixed constant; outside the shell both gradients vanish.
    At x = 0 or y = 0 the non-smooth |x| term contributes its limit 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = membership_u(x, y)
    slope = _smoothstep_prime(u - 1.0)
    if slope == 0.0:
        return np.zeros_like(x), np.zeros_like(y)
    diff = x - y
    dist = float(np.linalg.norm(diff))
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    scale = 1.0 + nx + ny
    unit_diff = diff / dist
    ex = x / nx if nx > 0 else np.zeros_like(x)
    ey = y / ny if ny > 0 else np.zeros_like(y)
    gx = -slope * (scale * unit_diff + dist * ex)
    gy = -slope * (-scale * unit_diff + dist * ey)
    return gx, gy


def split_kernel(
    kernel: Callable[[np.ndarray, np.ndarray], LogScaled],
    x: np.ndarray,
    y: np.ndarray,
) -> tuple[LogScaled, LogScaled]:
    """Split a kernel value into (chi * K, (1 - chi) * K)."""
    value = kernel(x, y)
    c = chi(x, y)
    local = value * c if c > 0.0 else LogScaled.zero()
    glob = value * (1.0 - c) if c < 1.0 else LogScaled.zero()
    return local, glob


def sample_local_pairs(
    rng: np.random.Generator,
    n: int,
    count: int,
    delta: float = 2.0,
    radius: float = 6.0,
    min_dist: float = 1e-5,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded pairs inside the scale-delta local region.

    Distances are drawn log-uniformly down to min_dist so samples crowd the
    near-diagonal where singular behaviour lives.  Prefixes of the returned
    list are themselves valid (smaller) samples: doubling count extends
    rather than reshuffles.
    """
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    while len(pairs) < count:
        x = rng.uniform(-radius, radius, size=n)
        cap = delta / (1.0 + 2.0 * np.linalg.norm(x) + 1.0)
        dist = math.exp(rng.uniform(math.log(min_dist), math.log(cap)))
        direction = rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        y = x + dist * direction
        if in_N(delta, x, y):
            pairs.append((x, y))
    return pairs


def sample_global_pairs(
    rng: np.random.Generator,
    n: int,
    count: int,
    radius: float = 8.0,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded pairs in the global region (complement of the delta=1 set)."""
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    while len(pairs) < count:
        x = rng.uniform(-radius, radius, size=n)
        y = rng.uniform(-radius, radius, size=n)
        if np.linalg.norm(x) < 1e-9:
            continue
        if not in_N(1.0, x, y):
            pairs.append((x, y))
    return pairs
