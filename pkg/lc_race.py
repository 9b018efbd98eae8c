#!/usr/bin/env python3
"""
Least hypervolume contributor by Monte Carlo racing.

Every box samples uniformly inside its contribution bounding box. Estimates
carry Chernoff confidence widths; boxes whose lower confidence limit exceeds
the upper limit of the current minimum leave the race. The race stops when one
box is left, when the current minimum is provably within a (1 + epsilon)
factor of every survivor, or once every survivor has a zero width. Volumes are
handled relative to the largest bounding box so that fronts with d = 100 do
not underflow. Three speedups are built in: pushing the width of the
current minimum below alpha times the round target, scanning influencers in
descending covered-volume order, and switching a box to an exact HSO
computation once sampling it has cost more than HSO would.
"""

import dataclasses
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from box_geometry import (
    ContributionBoundingBox,
    Front,
    FrontInputError,
    all_bounding_boxes,
    box_log_volume,
    find_dominated,
    influencers,
)
from exact_hypervolume import estimated_hso_cost, uncovered_fraction_in_bb

logger = logging.getLogger(__name__)

# Samples drawn per generator call; the stream is identical for any block size
_SAMPLE_BLOCK = 65_536
# Upper bound on booleans materialized per coverage check
_COVERAGE_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class RaceConfig:
    """
    Solver parameters.

    Args:
        epsilon: accepted relative excess over the minimal contribution (> 0)
        delta: failure probability, in (0, 1)
        gamma: exponent slack of the per-round confidence split, in (0, 1]
        alpha: push factor for the current minimum, in (0, 1)
        round_shrink: factor applied to the round target width, in (0, 1)
        seed: 64-bit unsigned seed of the per-box generator streams
        enable_push: drive the current minimum to alpha times the round target
        enable_exact_switch: compute a box exactly once sampling costs more
        hso_cost_constant: constant of the HSO operation estimate (> 0)
        workers: threads sampling different boxes of one round concurrently
    """

    epsilon: float = 1e-2
    delta: float = 1e-6
    gamma: float = 1.0
    alpha: float = 0.2
    round_shrink: float = 0.5
    seed: int = 0
    enable_push: bool = True
    enable_exact_switch: bool = True
    hso_cost_constant: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise FrontInputError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise FrontInputError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0.0 < self.gamma <= 1.0:
            raise FrontInputError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not 0.0 < self.alpha < 1.0:
            raise FrontInputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.round_shrink < 1.0:
            raise FrontInputError(f"round_shrink must lie in (0, 1), got {self.round_shrink}")
        if not 0 <= self.seed < 2 ** 64:
            raise FrontInputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.hso_cost_constant > 0.0:
            raise FrontInputError(f"hso_cost_constant must be > 0, got {self.hso_cost_constant}")
        if self.workers < 1:
            raise FrontInputError(f"workers must be >= 1, got {self.workers}")


@dataclass
class RaceState:
    """Sampling statistics of one box"""

    index: int
    bb: ContributionBoundingBox
    influencers: Tuple[int, ...]
    volume: float
    rng: np.random.Generator = field(repr=False)
    no_samples: int = 0
    no_succ_samples: int = 0
    estimate: float = 0.0
    width: float = math.inf
    no_ops: int = 0
    exact: bool = False
    in_race: bool = True
    _upper: np.ndarray = field(default=None, repr=False)
    _span: np.ndarray = field(default=None, repr=False)
    _covering: np.ndarray = field(default=None, repr=False)

    @classmethod
    def for_box(cls, points, idx, bb, influencer_idxs, rng, log_scale=None):
        """
        Args:
            log_scale: when given, volume is VOL(bb) / exp(log_scale)
        """
        lower, upper = bb.as_arrays()
        volume = bb.volume if log_scale is None else math.exp(bb.log_volume - log_scale)
        return cls(
            index=idx,
            bb=bb,
            influencers=tuple(influencer_idxs),
            volume=volume,
            rng=rng,
            _upper=upper,
            _span=upper - lower,
            _covering=points[list(influencer_idxs)].reshape(len(influencer_idxs), upper.size),
        )


@dataclass(frozen=True)
class BoxSnapshot:
    index: int
    estimate: float
    width: float
    no_samples: int
    exact: bool


@dataclass(frozen=True)
class RoundSnapshot:
    """Survivors as assumed at the end of a round, before deletion"""

    round: int
    target_width: float
    lc: int
    boxes: Tuple[BoxSnapshot, ...]
    deleted: Tuple[int, ...]


@dataclass(frozen=True)
class SolveResult:
    index: int
    estimate: float
    was_exact: bool
    rounds: int
    total_samples: int
    exact_switches: int
    eliminated_order: Tuple[Tuple[int, int], ...]
    log_estimate: float = -math.inf
    elapsed: float = field(default=0.0, compare=False)

    def as_dict(self):
        data = dataclasses.asdict(self)
        data["eliminated_order"] = [list(pair) for pair in self.eliminated_order]
        if not math.isfinite(self.log_estimate):
            data["log_estimate"] = None
        return data


def _confidence_log(n, R, gamma, delta):
    return math.log(2.0 * n * R ** (1.0 + gamma) / delta * (1.0 + gamma) / gamma)


def delta_of(vol_bb, no_samples, n, R, gamma, delta) -> float:
    """
    Confidence width of an estimate after no_samples samples in round R.

    sqrt(ln(2 n R^(1+gamma) (1+gamma) / (gamma delta)) / (2 no_samples)) * vol_bb
    """
    if vol_bb == 0.0:
        return 0.0
    return math.sqrt(_confidence_log(n, R, gamma, delta) / (2.0 * no_samples)) * vol_bb


def required_samples(vol_bb, target_delta, n, R, gamma, delta) -> int:
    """Smallest sample count whose confidence width is <= target_delta"""
    if vol_bb == 0.0:
        return 0
    if not target_delta > 0.0:
        raise FrontInputError(f"target width must be > 0, got {target_delta}")

    log = _confidence_log(n, R, gamma, delta)
    # the ratio first: vol_bb ** 2 underflows for d = 100 bounding boxes
    m = max(1, math.ceil(log * (vol_bb / target_delta) ** 2 / 2.0))
    # float rounding of the closed form can be one off either way
    while delta_of(vol_bb, m, n, R, gamma, delta) > target_delta:
        m += 1
    while m > 1 and delta_of(vol_bb, m - 1, n, R, gamma, delta) <= target_delta:
        m -= 1
    return m


def _count_covered(state, samples):
    """
    Scan influencers in stored order for each sample.

    Returns:
        tuple: (number of uncovered samples, coordinate comparisons made)
    """
    covering = state._covering
    k, d = covering.shape
    chunk = max(1, _COVERAGE_CHUNK_ELEMENTS // (k * d))
    successes = 0
    comparisons = 0
    for start in range(0, samples.shape[0], chunk):
        block = samples[start:start + chunk]
        inside = block[:, None, :] <= covering[None, :, :]
        covered = inside.all(axis=2)

        # comparisons per (sample, influencer): up to and including the first miss
        outside = ~inside
        per_box = np.where(outside.any(axis=2), outside.argmax(axis=2) + 1, d)
        hit = covered.any(axis=1)
        last = np.where(hit, covered.argmax(axis=1), k - 1)
        scanned = np.cumsum(per_box, axis=1)[np.arange(block.shape[0]), last]

        successes += int(block.shape[0] - hit.sum())
        comparisons += int(scanned.sum())
    return successes, comparisons


def sample_batch(state, m, rng):
    """Draw m samples in the bounding box and update the counts of state"""
    if m <= 0:
        return 0
    d = state._upper.size
    successes = 0
    remaining = m
    while remaining > 0:
        size = min(remaining, _SAMPLE_BLOCK)
        if state._covering.shape[0] == 0:
            # nothing can cover a sample
            successes += size
        else:
            u = rng.random((size, d))
            # (lower, upper]: every sample exceeds lower, matching the influencer filter
            samples = state._upper - u * state._span
            hits, comparisons = _count_covered(state, samples)
            successes += hits
            state.no_ops += comparisons
        remaining -= size

    state.no_samples += m
    state.no_succ_samples += successes
    state.estimate = state.no_succ_samples / state.no_samples * state.volume
    return successes


def sample_once(state, rng) -> bool:
    """
    Draw one uniform point in the bounding box of state.

    The point counts as a success when no influencer covers it. Counts,
    comparison counter and estimate of state are updated.
    """
    return sample_batch(state, 1, rng) == 1


class LeastContributorRace:
    """Race of all boxes of a front for the least contribution"""

    def __init__(self, front, config, observer: Optional[Callable[[RoundSnapshot], None]] = None):
        """
        Args:
            front: Front (or points accepted by Front)
            config: RaceConfig
            observer: called with a RoundSnapshot after every round
        """
        self.front = front if isinstance(front, Front) else Front(front)
        self.config = config
        self.observer = observer
        self.points = self.front.points
        self.n = self.front.n
        self.d = self.front.d
        self.states = []
        self.eliminated = []
        self.round = 0
        self.log_scale = 0.0
        self.scale = 1.0

    def _stream(self, idx):
        sequence = np.random.SeedSequence(self.config.seed, spawn_key=(idx,))
        return np.random.Generator(np.random.PCG64(sequence))

    def _fast_path(self):
        if self.n == 1:
            lone = self.points[0]
            return SolveResult(
                0, float(np.prod(lone)), True, 0, 0, 0, (),
                log_estimate=box_log_volume(np.zeros_like(lone), lone),
            )
        dominated = find_dominated(self.front)
        if dominated is not None:
            logger.debug("box %d is weakly dominated, contribution 0", dominated)
            return SolveResult(dominated, 0.0, True, 0, 0, 0, ())
        return None

    def _setup(self):
        boxes = all_bounding_boxes(self.points)
        for idx, bb in enumerate(boxes):
            if bb.is_empty:
                logger.debug("box %d has an empty bounding box, contribution 0", idx)
                return SolveResult(idx, 0.0, True, 0, 0, 0, ())

        # volumes, estimates and widths are kept relative to the largest bounding box
        self.log_scale = max(bb.log_volume for bb in boxes)
        self.scale = math.exp(self.log_scale)
        for idx, bb in enumerate(boxes):
            self.states.append(
                RaceState.for_box(
                    self.points, idx, bb, influencers(self.points, idx, bb), self._stream(idx),
                    log_scale=self.log_scale,
                )
            )
        return None

    def _should_switch(self, state):
        if not self.config.enable_exact_switch:
            return False
        cost = estimated_hso_cost(len(state.influencers), self.d, self.config.hso_cost_constant)
        return state.no_ops > cost

    def _switch_exact(self, state):
        fraction = uncovered_fraction_in_bb(self.points, state.index, state.bb, state.influencers)
        state.estimate = fraction * state.volume
        state.width = 0.0
        state.exact = True
        logger.debug(
            "box %d switched to exact after %d comparisons: %.6g",
            state.index, state.no_ops, state.estimate * self.scale,
        )

    def _refine(self, state, target):
        """Sample state until its width at the current round is <= target"""
        if state.exact:
            return
        if self._should_switch(state):
            self._switch_exact(state)
            return

        cfg = self.config
        target = min(target, state.width)
        needed = required_samples(state.volume, target, self.n, self.round, cfg.gamma, cfg.delta)
        if needed > state.no_samples:
            sample_batch(state, needed - state.no_samples, state.rng)
        state.width = delta_of(state.volume, state.no_samples, self.n, self.round, cfg.gamma, cfg.delta)

    def _survivors(self):
        return [s for s in self.states if s.in_race]

    @staticmethod
    def _current_min(survivors):
        # min keeps the first of equal estimates, i.e. the smallest index
        return min(survivors, key=lambda s: s.estimate)

    def _finished(self, lc, survivors):
        """One survivor left, none can sample further, or the abortion criterion holds"""
        if len(survivors) == 1:
            return True
        if all(s.width == 0.0 for s in survivors):
            return True
        return self._aborts(lc, survivors)

    def _aborts(self, lc, survivors):
        upper = lc.estimate + lc.width
        for state in survivors:
            if state is lc:
                continue
            lower = state.estimate - state.width
            if not (lower > 0.0 and upper / lower <= 1.0 + self.config.epsilon):
                return False
        return True

    def run(self) -> SolveResult:
        start = time.perf_counter()
        result = self._fast_path() or self._setup()
        if result is not None:
            return dataclasses.replace(result, elapsed=time.perf_counter() - start)

        cfg = self.config
        target = max(s.volume for s in self.states)
        pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None

        try:
            while True:
                target *= cfg.round_shrink
                self.round += 1
                survivors = self._survivors()

                if pool is not None:
                    list(pool.map(lambda s: self._refine(s, target), survivors))
                else:
                    for state in survivors:
                        self._refine(state, target)

                if cfg.enable_push:
                    self._refine(self._current_min(survivors), cfg.alpha * target)

                lc = self._current_min(survivors)
                scale = self.scale
                snapshot = tuple(
                    BoxSnapshot(s.index, s.estimate * scale, s.width * scale, s.no_samples, s.exact)
                    for s in survivors
                )

                threshold = lc.estimate + lc.width
                deleted = []
                for state in survivors:
                    if state is not lc and state.estimate - state.width > threshold:
                        state.in_race = False
                        deleted.append(state.index)
                        self.eliminated.append((state.index, self.round))

                if self.observer is not None:
                    self.observer(RoundSnapshot(self.round, target * scale, lc.index, snapshot, tuple(deleted)))

                survivors = self._survivors()
                logger.debug(
                    "round %d: target %.4g, LC~ %d (%.6g +- %.3g), %d deleted, %d left",
                    self.round, target * scale, lc.index, lc.estimate * scale, lc.width * scale,
                    len(deleted), len(survivors),
                )
                if self._finished(lc, survivors):
                    break
        finally:
            if pool is not None:
                pool.shutdown()

        result = SolveResult(
            index=lc.index,
            estimate=lc.estimate * self.scale,
            was_exact=lc.exact,
            rounds=self.round,
            total_samples=sum(s.no_samples for s in self.states),
            exact_switches=sum(1 for s in self.states if s.exact),
            eliminated_order=tuple(self.eliminated),
            log_estimate=math.log(lc.estimate) + self.log_scale if lc.estimate > 0.0 else -math.inf,
            elapsed=time.perf_counter() - start,
        )
        logger.info(
            "least contributor %d (estimate %.6g) after %d rounds, %d samples, %d exact switches",
            result.index, result.estimate, result.rounds, result.total_samples, result.exact_switches,
        )
        return result


def solve(front, config=None, observer=None) -> SolveResult:
    """
    Find a box whose contribution is at most (1 + epsilon) times the minimal
    one, with probability at least 1 - delta.

    Args:
        front: Front or (n, d) points
        config: RaceConfig, defaults to RaceConfig()
        observer: optional callable receiving a RoundSnapshot per round

    Returns:
        SolveResult
    """
    return LeastContributorRace(front, config or RaceConfig(), observer).run()


def solve_deterministic_replay(front, config=None) -> SolveResult:
    """
    Serial solve; equal (front, config) give an equal SolveResult.

    Elapsed time is the only field excluded from the comparison.
    """
    config = config or RaceConfig()
    return solve(front, dataclasses.replace(config, workers=1))
