#!/usr/bin/env python3
"""
Scalable random benchmark fronts.

Three kinds place points on a surface in [0, 1]^d (linear, spherical,
concave); two kinds draw points from the full space and redraw dominated
points until the set is an antichain (random1 uniform, random2 Gaussian).
Gaussian variates come from the polar Box-Muller method.
"""

import enum
import logging

import numpy as np

from box_geometry import Front, FrontInputError, weakly_dominated_mask

logger = logging.getLogger(__name__)

REDRAWS_PER_POINT = 1_000_000


class DatasetBudgetError(RuntimeError):
    """Too many redraws while building an antichain"""


class DatasetKind(enum.Enum):
    LINEAR = "linear"
    SPHERICAL = "spherical"
    CONCAVE = "concave"
    RANDOM1 = "random1"
    RANDOM2 = "random2"

    @classmethod
    def parse(cls, text):
        try:
            return cls(text.strip().lower())
        except ValueError:
            choices = ", ".join(kind.value for kind in cls)
            raise FrontInputError(f"unknown dataset '{text}' (choose from {choices})") from None


def gaussians(rng, size) -> np.ndarray:
    """
    Standard normal variates by polar rejection.

    Pairs (u, v) uniform in [-1, 1]^2 are accepted when 0 < s = u^2 + v^2 < 1
    and yield u * sqrt(-2 ln(s) / s).

    Args:
        rng: numpy Generator
        size: int or shape tuple

    Returns:
        np.ndarray: variates of the requested shape
    """
    shape = (size,) if np.isscalar(size) else tuple(size)
    total = int(np.prod(shape))
    out = np.empty(total)
    filled = 0
    while filled < total:
        need = total - filled
        # acceptance rate is pi/4
        pairs = rng.uniform(-1.0, 1.0, size=(need + need // 3 + 8, 2))
        s = np.einsum("ij,ij->i", pairs, pairs)
        accepted = (s > 0.0) & (s < 1.0)
        u = pairs[accepted, 0]
        s = s[accepted]
        values = u * np.sqrt(-2.0 * np.log(s) / s)
        take = min(values.size, need)
        out[filled:filled + take] = values[:take]
        filled += take
    return out.reshape(shape)


def gaussian(rng) -> float:
    """One standard normal variate"""
    return float(gaussians(rng, 1)[0])


def _surface_points(kind, n, d, rng):
    y = np.abs(gaussians(rng, (n, d)))
    # an all-zero draw has no direction; redraw those rows
    while True:
        empty = ~np.any(y > 0.0, axis=1)
        if not empty.any():
            break
        y[empty] = np.abs(gaussians(rng, (int(empty.sum()), d)))

    if kind is DatasetKind.LINEAR:
        norm = y.sum(axis=1)
    elif kind is DatasetKind.SPHERICAL:
        norm = np.sqrt((y ** 2).sum(axis=1))
    else:
        norm = np.sqrt(y).sum(axis=1) ** 2
    return np.clip(y / norm[:, None], 0.0, 1.0)


def _draw_space_points(kind, count, d, rng):
    if kind is DatasetKind.RANDOM1:
        return rng.random((count, d))
    return np.abs(1.0 + gaussians(rng, (count, d)))


def _antichain_points(kind, n, d, rng, attempt_budget):
    points = _draw_space_points(kind, n, d, rng)
    redraws = 0
    while True:
        dominated = weakly_dominated_mask(points)
        count = int(dominated.sum())
        if count == 0:
            break
        redraws += count
        if redraws > attempt_budget:
            raise DatasetBudgetError(
                f"{kind.value}: gave up after {attempt_budget} redraws for n={n}, d={d}"
            )
        points[dominated] = _draw_space_points(kind, count, d, rng)

    logger.debug("%s: %d redraws for n=%d, d=%d", kind.value, redraws, n, d)
    return points


def generate(kind, n, d, seed, attempt_budget=None) -> Front:
    """
    Generate a benchmark front.

    Args:
        kind: DatasetKind (or its name)
        n: number of points, >= 1
        d: dimension, >= 1
        seed: generator seed
        attempt_budget: redraw limit for random1/random2 (default 10^6 * n)

    Returns:
        Front
    """
    if not isinstance(kind, DatasetKind):
        kind = DatasetKind.parse(kind)
    if n < 1 or d < 1:
        raise FrontInputError(f"need n >= 1 and d >= 1, got n={n}, d={d}")

    rng = np.random.default_rng(seed)
    if kind in (DatasetKind.RANDOM1, DatasetKind.RANDOM2):
        budget = REDRAWS_PER_POINT * n if attempt_budget is None else attempt_budget
        points = _antichain_points(kind, n, d, rng, budget)
    else:
        points = _surface_points(kind, n, d, rng)

    logger.info("Generated %s front with n=%d, d=%d (seed %s)", kind.value, n, d, seed)
    return Front(points)
