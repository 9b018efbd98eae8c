#!/usr/bin/env python3
"""
Exact hypervolume and contributions.

HSO (Hypervolume by Slicing Objectives) is the production fallback of the
racing solver; inclusion-exclusion over all subsets is an independent oracle
for small fronts. The hardness diagnostic H is evaluated from exact
contributions and bounding-box volumes.
"""

import enum
import logging
import math
import sys
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from box_geometry import (
    FrontInputError,
    all_bounding_boxes,
    as_points,
    clip_to_bounding_box,
    weakly_dominated_mask,
)

logger = logging.getLogger(__name__)

INCLUSION_EXCLUSION_MAX_N = 25


class ExactAlgo(enum.Enum):
    HSO = "hso"
    INCLUSION_EXCLUSION = "inclexcl"

    @classmethod
    def parse(cls, text):
        for algo in cls:
            if algo.value == text.lower() or algo.name == text.upper():
                return algo
        raise FrontInputError(f"unknown exact algorithm: {text}")


@dataclass(frozen=True)
class HardnessTerm:
    index: int
    bb_volume: float
    exact_contribution: float
    denominator: float


@dataclass(frozen=True)
class HardnessReport:
    """H is math.inf when two boxes share the minimal contribution"""

    H: float
    terms: Tuple[HardnessTerm, ...]


def _nondominated(points):
    if points.shape[0] < 2:
        return points
    return points[~weakly_dominated_mask(points)]


def _hso(points):
    # slice along the last objective, recurse on the rest
    n, d = points.shape
    if n == 0:
        return 0.0
    if d == 1:
        return float(points[:, 0].max())

    order = np.argsort(-points[:, -1], kind="stable")
    ordered = points[order]
    heights = ordered[:, -1]

    volume = 0.0
    for k in range(n):
        bottom = heights[k + 1] if k + 1 < n else 0.0
        depth = heights[k] - bottom
        if depth <= 0.0:
            continue
        volume += depth * _hso(_nondominated(ordered[:k + 1, :-1]))
    return volume


def _inclusion_exclusion(points):
    n, d = points.shape
    boxes = [points[i] for i in range(n)]
    total = 0.0

    def extend(start, running_min, size):
        nonlocal total
        for j in range(start, n):
            corner = boxes[j] if running_min is None else np.minimum(running_min, boxes[j])
            volume = float(np.prod(corner))
            if volume == 0.0:
                # every superset shares this zero extent
                continue
            total += volume if size % 2 == 1 else -volume
            extend(j + 1, corner, size + 1)

    extend(0, None, 1)
    return total


def hyp(front, algo=ExactAlgo.HSO) -> float:
    """
    Volume of the union of the boxes spanned from the origin.

    Args:
        front: Front or (n, d) array, possibly empty
        algo: ExactAlgo

    Returns:
        float: hypervolume
    """
    points = as_points(front)
    n = points.shape[0]
    if algo is ExactAlgo.INCLUSION_EXCLUSION and n > INCLUSION_EXCLUSION_MAX_N:
        raise FrontInputError(
            f"inclusion-exclusion is limited to n <= {INCLUSION_EXCLUSION_MAX_N}, got n = {n}"
        )
    if n == 0:
        return 0.0
    if algo is ExactAlgo.INCLUSION_EXCLUSION:
        return max(0.0, _inclusion_exclusion(points))
    return _hso(_nondominated(points))


def _is_weakly_dominated(points, idx):
    others = np.delete(points, idx, axis=0)
    return bool(others.shape[0]) and bool(np.any(np.all(others >= points[idx], axis=1)))


def con_exact(front, idx, algo=ExactAlgo.HSO) -> float:
    """HYP(M) - HYP(M without idx), clamped at 0"""
    points = as_points(front)
    if _is_weakly_dominated(points, idx):
        return 0.0
    value = hyp(points, algo) - hyp(np.delete(points, idx, axis=0), algo)
    return max(0.0, value)


def uncovered_fraction_in_bb(front, idx, bb, influencer_idxs, algo=ExactAlgo.HSO) -> float:
    """
    Share of bb not covered by the influencers of box idx, in [0, 1].

    Influencers are clipped to bb and rescaled so bb becomes the unit cube,
    which keeps the result meaningful where VOL(bb) underflows.
    """
    if bb.is_empty:
        return 0.0
    if not influencer_idxs:
        return 1.0
    lower, upper = bb.as_arrays()
    points = as_points(front)
    clipped = clip_to_bounding_box(points[list(influencer_idxs)], bb) / (upper - lower)
    clipped = clipped[np.all(clipped > 0.0, axis=1)]
    if clipped.shape[0] == 0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - hyp(clipped, algo)))


def con_exact_in_bb(front, idx, bb, influencer_idxs, algo=ExactAlgo.HSO) -> float:
    """
    Contribution of box idx computed inside its bounding box only.

    The n_A influencers are translated so bb.lower is the origin and clipped
    to bb; the uncovered share of bb is scaled by VOL(bb).
    """
    return bb.volume * uncovered_fraction_in_bb(front, idx, bb, influencer_idxs, algo)


def all_contributions_exact(front, algo=ExactAlgo.HSO) -> np.ndarray:
    """Exact contribution of every box as HYP differences"""
    points = as_points(front)
    n = points.shape[0]
    total = hyp(points, algo)
    values = np.zeros(n)
    for i in range(n):
        if _is_weakly_dominated(points, i):
            continue
        values[i] = max(0.0, total - hyp(np.delete(points, i, axis=0), algo))
    return values


def mincon_lc_exact(front, algo=ExactAlgo.HSO):
    """
    Least contributor and its contribution; smallest index on exact ties.

    Returns:
        tuple: (index, value)
    """
    points = as_points(front)
    if points.shape[0] < 1:
        raise FrontInputError("a front needs at least one box")
    values = all_contributions_exact(points, algo)
    idx = int(np.argmin(values))
    return idx, float(values[idx])


def estimated_hso_cost(n_a, d, constant=1.0) -> float:
    """
    Operation estimate constant * n_A * C(n_A + d - 2, d - 1) for HSO.

    Saturates at the largest float instead of overflowing.
    """
    if n_a <= 0:
        return 0.0
    exact = n_a * math.comb(n_a + d - 2, d - 1)
    if exact.bit_length() >= sys.float_info.max_exp:
        return sys.float_info.max
    return min(constant * float(exact), sys.float_info.max)


def _log_term(n, delta, max_volume, gap):
    loglog = 0.0
    ratio = max_volume / gap
    if ratio > 1.0:
        loglog = max(0.0, math.log(math.log(ratio)))
    return math.log(n / delta) + loglog


def hardness_H(front, delta) -> HardnessReport:
    """
    Instance hardness governing the expected number of samples.

    Log-log factors are clamped below at 0. H is infinite when the minimal
    contribution is attained by more than one box.

    Args:
        front: Front or (n, d) array with n >= 2
        delta: failure probability in (0, 1)

    Returns:
        HardnessReport
    """
    points = as_points(front)
    n = points.shape[0]
    if n < 2:
        raise FrontInputError("hardness needs at least two boxes")
    if not 0.0 < delta < 1.0:
        raise FrontInputError(f"delta must lie in (0, 1), got {delta}")

    values = all_contributions_exact(points, ExactAlgo.HSO)
    volumes = np.array([bb.volume for bb in all_bounding_boxes(points)])
    lc = int(np.argmin(values))
    mincon = float(values[lc])
    sec_min = float(np.sort(values)[1])
    max_volume = float(volumes.max())

    if sec_min == mincon:
        terms = tuple(
            HardnessTerm(i, float(volumes[i]), float(values[i]),
                         (sec_min if i == lc else float(values[i])) - mincon)
            for i in range(n)
        )
        return HardnessReport(H=math.inf, terms=terms)

    H = 0.0
    terms = []
    for i in range(n):
        gap = (sec_min if i == lc else float(values[i])) - mincon
        H += volumes[i] ** 2 / gap ** 2 * _log_term(n, delta, max_volume, gap)
        terms.append(HardnessTerm(i, float(volumes[i]), float(values[i]), gap))

    logger.debug("hardness H = %.6g over %d boxes", H, n)
    return HardnessReport(H=float(H), terms=tuple(terms))
