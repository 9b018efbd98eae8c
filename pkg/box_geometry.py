#!/usr/bin/env python3
"""
Box geometry for hypervolume contributions.

Every point x of a front spans the axis-aligned box [0, x_1] x ... x [0, x_d]
from the origin. This module holds the front type, weak dominance, the
contribution bounding boxes and the influencer lists the racing solver samples
against.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# Upper bound on booleans materialized at once by the pairwise dominance scan
_DOMINANCE_CHUNK_ELEMENTS = 4_000_000


class FrontInputError(ValueError):
    """Invalid box, front or solver input"""


class FrontParseError(FrontInputError):
    """Malformed front file line"""

    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


Box = Tuple[float, ...]


def _as_coords(values, name="box"):
    coords = np.asarray(values, dtype=float)
    if coords.ndim != 1 or coords.size == 0:
        raise FrontInputError(f"{name} must be a non-empty sequence of coordinates")
    return coords


class Front:
    """
    An immutable ordered set of n boxes sharing one dimension d.

    Indices 0..n-1 identify boxes for the lifetime of the value. The points
    are held as a read-only (n, d) float array.
    """

    __slots__ = ("_points",)

    def __init__(self, points):
        """
        Args:
            points: n sequences of d nonnegative finite coordinates
        """
        try:
            array = np.array(points, dtype=float)
        except ValueError as e:
            raise FrontInputError(f"boxes must share one dimension: {e}") from e

        if array.size == 0 and array.ndim == 1:
            raise FrontInputError("a front needs at least one box")
        if array.ndim != 2:
            raise FrontInputError("boxes must share one dimension")
        if array.shape[0] < 1:
            raise FrontInputError("a front needs at least one box")
        if array.shape[1] < 1:
            raise FrontInputError("boxes need at least one coordinate")
        if not np.all(np.isfinite(array)):
            raise FrontInputError("coordinates must be finite")
        if np.any(array < 0):
            raise FrontInputError("coordinates must be nonnegative")

        array.flags.writeable = False
        self._points = array

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def n(self) -> int:
        return self._points.shape[0]

    @property
    def d(self) -> int:
        return self._points.shape[1]

    def box(self, idx) -> Box:
        return tuple(float(v) for v in self._points[idx])

    def scaled(self, dim, factor) -> "Front":
        """Copy with coordinate dim of every box multiplied by factor"""
        array = self._points.copy()
        array[:, dim] *= factor
        return Front(array)

    def __len__(self):
        return self.n

    def __iter__(self):
        return (self.box(i) for i in range(self.n))

    def __eq__(self, other):
        if not isinstance(other, Front):
            return NotImplemented
        return self._points.shape == other._points.shape and bool(np.array_equal(self._points, other._points))

    def __hash__(self):
        return hash((self._points.shape, self._points.tobytes()))

    def __repr__(self):
        return f"Front(n={self.n}, d={self.d})"


def as_points(front) -> np.ndarray:
    """
    Coerce a Front or an (n, d) array-like to a float array.

    An empty sequence is allowed and yields a (0, 0) array.
    """
    if isinstance(front, Front):
        return front.points
    array = np.asarray(front, dtype=float)
    if array.size == 0:
        return array.reshape(0, array.shape[1] if array.ndim == 2 else 0)
    if array.ndim != 2:
        raise FrontInputError("boxes must share one dimension")
    return array


@dataclass(frozen=True)
class ContributionBoundingBox:
    """
    Lower and upper corner of the smallest axis-aligned box holding the region
    uniquely dominated by one box. upper equals the owning box.
    """

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    @property
    def volume(self) -> float:
        return box_volume(self.lower, self.upper)

    @property
    def log_volume(self) -> float:
        """Natural log of the volume; stays finite where the product underflows"""
        return box_log_volume(self.lower, self.upper)

    @property
    def is_empty(self) -> bool:
        """Some extent is zero"""
        return bool(np.any(np.asarray(self.upper) <= np.asarray(self.lower)))

    def as_arrays(self):
        return np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)


def dominates(a, b) -> bool:
    """True iff a_i >= b_i for every i; a box weakly dominates itself"""
    a = _as_coords(a, "a")
    b = _as_coords(b, "b")
    if a.shape != b.shape:
        raise FrontInputError(f"dimension mismatch: {a.size} vs {b.size}")
    return bool(np.all(a >= b))


def box_volume(lower, upper) -> float:
    """Product of max(0, upper_i - lower_i)"""
    extent = np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float)
    return float(np.prod(np.maximum(extent, 0.0)))


def box_log_volume(lower, upper) -> float:
    """Sum of log(upper_i - lower_i); -inf for an empty box"""
    extent = np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float)
    if np.any(extent <= 0.0):
        return -math.inf
    return float(np.log(extent).sum())


def weakly_dominated_mask(points) -> np.ndarray:
    """
    Mark every box weakly dominated by another box of the set.

    Of two identical boxes only the one with the larger index is marked, so
    removing the marked boxes leaves one copy of each duplicate.

    Args:
        points: (n, d) array

    Returns:
        np.ndarray: boolean mask of length n
    """
    points = as_points(points)
    n = points.shape[0]
    mask = np.zeros(n, dtype=bool)
    if n < 2:
        return mask

    d = points.shape[1]
    chunk = max(1, _DOMINANCE_CHUNK_ELEMENTS // max(1, n * d))
    order = np.arange(n)
    for start in range(0, n, chunk):
        dominators = points[start:start + chunk]
        ge = np.all(dominators[:, None, :] >= points[None, :, :], axis=2)
        eq = np.all(dominators[:, None, :] == points[None, :, :], axis=2)
        rows = order[start:start + chunk][:, None]
        # a duplicate only dominates the copies after it
        counts = ge & (~eq | (rows < order[None, :]))
        mask |= counts.any(axis=0)
    return mask


def find_dominated(front) -> Optional[int]:
    """
    Smallest index of a weakly dominated box, or None for an antichain.

    For exact duplicates the larger index of the pair is reported.
    """
    mask = weakly_dominated_mask(front)
    hits = np.flatnonzero(mask)
    if hits.size == 0:
        return None
    return int(hits[0])


def contribution_bounding_box(front, idx) -> ContributionBoundingBox:
    """
    Bounding box of the contribution of box idx.

    Starts from [0, A]; every other box B that dominates A in all dimensions
    but one (say i, where b_i < a_i) lifts lower_i to b_i. If some B weakly
    dominates A everywhere, A contributes nothing and lower is set to upper.

    Args:
        front: Front or (n, d) array
        idx: index of the owning box

    Returns:
        ContributionBoundingBox
    """
    points = as_points(front)
    a = points[idx]
    lower = np.zeros_like(a)

    others = np.delete(points, idx, axis=0)
    if others.shape[0]:
        below = others < a
        misses = below.sum(axis=1)
        if np.any(misses == 0):
            return ContributionBoundingBox(lower=tuple(a.tolist()), upper=tuple(a.tolist()))

        cutters = misses == 1
        if np.any(cutters):
            rows = others[cutters]
            dims = np.argmax(below[cutters], axis=1)
            np.maximum.at(lower, dims, rows[np.arange(rows.shape[0]), dims])

    return ContributionBoundingBox(lower=tuple(lower.tolist()), upper=tuple(a.tolist()))


def all_bounding_boxes(front):
    """Bounding boxes for every index, O(d n^2) overall"""
    points = as_points(front)
    return [contribution_bounding_box(points, i) for i in range(points.shape[0])]


def influencers(front, idx, bb) -> Tuple[int, ...]:
    """
    Boxes that can cover a point sampled in bb.

    A box qualifies when it exceeds bb.lower strictly in every dimension.
    The list is ordered by the volume of bb it covers, largest first, with
    ties broken by ascending index, so that covered samples are rejected
    after as few comparisons as possible.
    An empty bb has no influencers.

    Args:
        front: Front or (n, d) array
        idx: index of the owning box
        bb: its ContributionBoundingBox

    Returns:
        tuple: ordered box indices
    """
    if bb.is_empty:
        return ()
    points = as_points(front)
    lower, upper = bb.as_arrays()

    candidates = np.all(points > lower, axis=1)
    candidates[idx] = False
    found = np.flatnonzero(candidates)
    if found.size == 0:
        return ()

    # candidates overlap bb in every dimension; log keeps d = 100 products apart
    overlap = np.minimum(points[found], upper) - lower
    covered = np.log(overlap).sum(axis=1)
    order = np.lexsort((found, -covered))
    return tuple(int(j) for j in found[order])


def clip_to_bounding_box(boxes, bb) -> np.ndarray:
    """
    Translate boxes so bb.lower becomes the origin and clip them to bb.

    Extents that fall outside bb are clamped to zero.
    """
    lower, upper = bb.as_arrays()
    boxes = np.asarray(boxes, dtype=float).reshape(-1, lower.size)
    return np.maximum(np.minimum(boxes, upper) - lower, 0.0)
